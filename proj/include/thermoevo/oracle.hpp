#pragma once

/**
 * @file oracle.hpp
 * @brief Spectral reference solver for spatially constant 1-D problems.
 *
 * The semi-discrete system E y' = J y + G f(t) with y = (U, x),
 * E = diag(M0, I) and J = [[-(D + A_h), -C], [B, diag(lambda)]] is rotated
 * into the orthonormal sine/cosine modes of the staggered difference matrix.
 * With constant coefficients it splits into small dense blocks that are
 * integrated exactly: the algebraic directions (kernel of E) are eliminated,
 * the rest is propagated by the matrix exponential, and the forcing integral
 * is evaluated with Gauss-Legendre quadrature on dt/substeps sub-intervals.
 */

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "thermoevo/errors.hpp"
#include "thermoevo/evolution.hpp"

namespace thermoevo {

struct OracleOptions {
  int substeps = 64;             // dt_oracle = dt / substeps
  double coupling_cutoff = 1e-13;  // relative size below which entries do not couple modes
  double kernel_cutoff = 1e-10;    // relative eigenvalue of E below which a direction is algebraic
};

/// Orthogonal change of basis from grid values to discrete modes over (U, x).
inline Eigen::MatrixXd mode_transform(const DiscreteSystem& sys) {
  const auto& lay = sys.layout;
  const Index n_u = lay.total(), n_x = sys.n_aux(), n = n_u + n_x;
  const Eigen::MatrixXd qn = node_mode_basis(sys.grid), qf = face_mode_basis(sys.grid);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int b = 0; b < 4; ++b) q.block(lay.offset(b), lay.offset(b), lay.size(b), lay.size(b)) = b % 2 == 0 ? qn : qf;

  // auxiliary states grouped by (block of the unknown they read, position among that unknown's states)
  std::map<std::pair<int, Index>, std::vector<Index>> groups;
  std::map<Index, Index> seen;
  for (Index i = 0; i < n_x; ++i) {
    const Index target = sys.aux_target[static_cast<std::size_t>(i)];
    int block = 3;
    while (block > 0 && target < lay.offset(block)) --block;
    groups[{block, seen[target]++}].push_back(i);
  }
  for (const auto& [key, members] : groups) {
    const int block = key.first;
    if (static_cast<Index>(members.size()) != lay.size(block))
      throw NonconstantCoefficients("spectral_solve: auxiliary states are not uniform across the grid");
    const Eigen::MatrixXd& basis = block % 2 == 0 ? qn : qf;
    for (std::size_t r = 0; r < members.size(); ++r) {
      if (sys.aux_target[static_cast<std::size_t>(members[r])] != lay.offset(block) + static_cast<Index>(r))
        throw NonconstantCoefficients("spectral_solve: auxiliary states are not uniform across the grid");
      for (std::size_t c = 0; c < members.size(); ++c) q(n_u + members[r], n_u + members[c]) = basis(static_cast<Index>(r), static_cast<Index>(c));
    }
  }
  return q;
}

/// Groups of mode coordinates coupled by nonnegligible entries of either matrix.
inline std::vector<std::vector<Index>> coupled_components(const Eigen::MatrixXd& e, const Eigen::MatrixXd& j, double cutoff) {
  const Index n = e.rows();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  const auto find = [&](Index a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  const double te = cutoff * e.cwiseAbs().maxCoeff(), tj = cutoff * j.cwiseAbs().maxCoeff();
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c)
      if (r != c && (std::abs(e(r, c)) > te || std::abs(j(r, c)) > tj)) parent[static_cast<std::size_t>(find(r))] = find(c);
  std::map<Index, std::vector<Index>> comp;
  for (Index r = 0; r < n; ++r) comp[find(r)].push_back(r);
  std::vector<std::vector<Index>> out;
  for (auto& [root, members] : comp) out.push_back(std::move(members));
  return out;
}

/// Reference trajectory on the problem's time grid.
inline Trajectory spectral_solve(const EvolutionProblem& p, const OracleOptions& opt = {}) {
  p.validate();
  const DiscreteSystem& sys = p.system;
  if (!sys.spatially_constant) throw NonconstantCoefficients("spectral_solve: coefficients vary in space");
  if (opt.substeps < 1) throw InvalidInput("spectral_solve: substeps must be positive");
  const Index n_u = sys.n_unknowns(), n_x = sys.n_aux(), n = n_u + n_x;
  const Index n_f = static_cast<Index>(p.forcing.size());

  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n), j = Eigen::MatrixXd::Zero(n, n), g = Eigen::MatrixXd::Zero(n, std::max<Index>(n_f, 1));
  e.topLeftCorner(n_u, n_u) = Eigen::MatrixXd(sys.m0);
  e.bottomRightCorner(n_x, n_x).setIdentity();
  j.topLeftCorner(n_u, n_u) = -Eigen::MatrixXd(sys.feed + sys.ops.a);
  j.topRightCorner(n_u, n_x) = -Eigen::MatrixXd(sys.c);
  j.bottomLeftCorner(n_x, n_u) = Eigen::MatrixXd(sys.b);
  j.bottomRightCorner(n_x, n_x) = sys.lambda.asDiagonal();
  for (Index k = 0; k < n_f; ++k) {
    const auto& term = p.forcing[static_cast<std::size_t>(k)];
    const Index off = term.block == Block::V ? sys.layout.v() : sys.layout.theta();
    g.block(off, k, term.profile.size(), 1) = term.profile;
  }

  const Eigen::MatrixXd q = mode_transform(sys);
  const Eigen::MatrixXd em = q.transpose() * e * q, jm = q.transpose() * j * q, gm = q.transpose() * g;
  const auto components = coupled_components(em, jm, opt.coupling_cutoff);

  const Index steps = p.steps();
  Trajectory tr;
  tr.layout = sys.layout;
  tr.dt = p.dt;
  tr.rho = p.rho;
  tr.scheme = Scheme::Trapezoidal;
  Eigen::MatrixXd ym = Eigen::MatrixXd::Zero(steps + 1, n);

  // forcing time profiles at the quadrature nodes of every step
  static constexpr std::array<double, 4> gl_x{0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563,
                                              0.5 + 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.8611363115940526};
  static constexpr std::array<double, 4> gl_w{0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461, 0.5 * 0.6521451548625461,
                                              0.5 * 0.3478548451374538};
  const int s_count = opt.substeps;
  const double h = p.dt / s_count;
  const auto forcing_values = [&](double t) {
    Eigen::VectorXd f(n_f);
    for (Index k = 0; k < n_f; ++k) f(k) = p.forcing[static_cast<std::size_t>(k)].temporal(t);
    return f;
  };

  const double g_scale = gm.cwiseAbs().maxCoeff();
  for (const auto& comp : components) {
    const Index m = static_cast<Index>(comp.size());
    Eigen::MatrixXd ec(m, m), jc(m, m), gc(m, n_f);
    for (Index r = 0; r < m; ++r) {
      for (Index c = 0; c < m; ++c) {
        ec(r, c) = em(comp[static_cast<std::size_t>(r)], comp[static_cast<std::size_t>(c)]);
        jc(r, c) = jm(comp[static_cast<std::size_t>(r)], comp[static_cast<std::size_t>(c)]);
      }
      for (Index k = 0; k < n_f; ++k) gc(r, k) = gm(comp[static_cast<std::size_t>(r)], k);
    }
    if (n_f == 0 || g_scale == 0.0 || gc.cwiseAbs().maxCoeff() <= opt.coupling_cutoff * g_scale) continue;

    // range / kernel split of the symmetric E block
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ec + ec.transpose()));
    const double e_max = es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<Index> ir, ik;
    for (Index i = 0; i < m; ++i) (es.eigenvalues()(i) > opt.kernel_cutoff * e_max ? ir : ik).push_back(i);
    const Index mr = static_cast<Index>(ir.size()), mk = static_cast<Index>(ik.size());
    Eigen::MatrixXd wr(m, mr), wk(m, mk);
    Eigen::VectorXd lr(mr);
    for (Index i = 0; i < mr; ++i) {
      wr.col(i) = es.eigenvectors().col(ir[static_cast<std::size_t>(i)]);
      lr(i) = es.eigenvalues()(ir[static_cast<std::size_t>(i)]);
    }
    for (Index i = 0; i < mk; ++i) wk.col(i) = es.eigenvectors().col(ik[static_cast<std::size_t>(i)]);

    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(mk, mr), t = Eigen::MatrixXd::Zero(mk, n_f);
    if (mk > 0) {
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(wk.transpose() * jc * wk);
      if (!lu.isInvertible()) throw SingularSystem("spectral_solve: algebraic part of a mode block is singular");
      s = lu.solve(wk.transpose() * jc * wr);
      t = lu.solve(wk.transpose() * gc);
    }
    const Eigen::MatrixXd jrk = wr.transpose() * jc * wk;
    const Eigen::MatrixXd a = lr.cwiseInverse().asDiagonal() * (wr.transpose() * jc * wr - jrk * s);
    const Eigen::MatrixXd w = lr.cwiseInverse().asDiagonal() * (wr.transpose() * gc - jrk * t);

    // kernel columns e^{A (dt - tau)} W for every quadrature node tau
    const Eigen::MatrixXd e_h = (a * h).exp();
    Eigen::MatrixXd e_dt = Eigen::MatrixXd::Identity(mr, mr);
    for (int i = 0; i < s_count; ++i) e_dt = e_h * e_dt;
    Eigen::MatrixXd kern(mr, static_cast<Index>(s_count) * 4 * n_f);
    std::array<Eigen::MatrixXd, 4> last;
    for (int qn = 0; qn < 4; ++qn) last[static_cast<std::size_t>(qn)] = (a * ((1.0 - gl_x[static_cast<std::size_t>(qn)]) * h)).exp() * w;
    for (int sub = s_count - 1; sub >= 0; --sub) {
      for (int qn = 0; qn < 4; ++qn) {
        kern.middleCols((static_cast<Index>(sub) * 4 + qn) * n_f, n_f) = gl_w[static_cast<std::size_t>(qn)] * h * last[static_cast<std::size_t>(qn)];
        last[static_cast<std::size_t>(qn)] = e_h * last[static_cast<std::size_t>(qn)];
      }
    }

    Eigen::VectorXd state = Eigen::VectorXd::Zero(mr), phi(kern.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(steps + 1, m);
    for (Index step = 0; step < steps; ++step) {
      const double t0 = p.time(step);
      for (int sub = 0; sub < s_count; ++sub)
        for (int qn = 0; qn < 4; ++qn)
          phi.segment((static_cast<Index>(sub) * 4 + qn) * n_f, n_f) = forcing_values(t0 + (sub + gl_x[static_cast<std::size_t>(qn)]) * h);
      state = e_dt * state + kern * phi;
      Eigen::VectorXd y = wr * state;
      if (mk > 0) y -= wk * (s * state + t * forcing_values(p.time(step + 1)));
      out.row(step + 1) = y.transpose();
    }
    for (Index r = 0; r < m; ++r) ym.col(comp[static_cast<std::size_t>(r)]) = out.col(r);
  }

  const Eigen::MatrixXd grid_values = ym * q.transpose();
  tr.u = grid_values.leftCols(n_u);
  tr.x = grid_values.rightCols(n_x);
  return tr;
}

struct Comparison {
  std::array<double, 4> field{};  // v, sigma, theta_big, q
  double overall = 0.0;
};

inline constexpr std::array<const char*, 4> trajectory_field_names{"v", "sigma", "theta_big", "q"};

/// Weighted space-time L2 error of @p a relative to @p b, per field and over all unknowns.
inline Comparison compare(const Trajectory& a, const Trajectory& b) {
  if (a.u.rows() != b.u.rows() || a.u.cols() != b.u.cols() || a.dt != b.dt || a.layout.n_nodes != b.layout.n_nodes)
    throw GridMismatch("compare: trajectories live on different grids");
  const auto rel = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const double num = weighted_norm(WeightedSignal(0.0, b.dt, b.rho, x - y));
    const double den = weighted_norm(WeightedSignal(0.0, b.dt, b.rho, y));
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
  };
  Comparison c;
  for (int k = 0; k < 4; ++k) {
    const Index off = b.layout.offset(k), len = b.layout.size(k);
    c.field[static_cast<std::size_t>(k)] = rel(a.u.middleCols(off, len), b.u.middleCols(off, len));
  }
  c.overall = rel(a.u, b.u);
  return c;
}

}  // namespace thermoevo
