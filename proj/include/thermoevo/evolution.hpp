#pragma once

/**
 * @file evolution.hpp
 * @brief Causal time stepping of (d/dt M0 + M1(1/(d/dt)) + A_h) U = F on the staggered grid.
 *
 * The rational parts a1 (on Theta) and a2 (on q) are replaced by their
 * state-space realizations, so M1(1/(d/dt)) U = D U + C x with
 * x' = diag(lambda) x + B U. The semi-discrete system
 *
 *   M0 U' + (D + A_h) U + C x = F,   x' = diag(lambda) x + B U
 *
 * is marched from zero data with backward Euler or the trapezoidal rule.
 */

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "thermoevo/errors.hpp"
#include "thermoevo/fourier_laplace.hpp"
#include "thermoevo/material.hpp"
#include "thermoevo/realization.hpp"
#include "thermoevo/signal.hpp"
#include "thermoevo/spatial.hpp"
#include "thermoevo/wellposedness.hpp"

namespace thermoevo {

enum class Scheme { BackwardEuler, Trapezoidal };

inline std::string_view to_string(Scheme s) { return s == Scheme::BackwardEuler ? "BackwardEuler" : "Trapezoidal"; }

inline Scheme scheme_from_string(std::string_view s) {
  if (s == "BackwardEuler") return Scheme::BackwardEuler;
  if (s == "Trapezoidal") return Scheme::Trapezoidal;
  throw InvalidInput("unknown scheme '" + std::string(s) + "'");
}

/**
 * @brief Assembled (M0, M1 realization, A_h) over the stacked unknowns plus auxiliary states.
 *
 * Vertex coefficients (rho0, nu, a1, n0) are averages of the two adjacent
 * cells; midpoint coefficients (C, Gamma, a0, zeta0, a2) are the cell values.
 * Gamma and zeta0 act on the vertex temperature through the averaging
 * operator P, so M0 = L_h^T diag(rho0, C^-1, nu, a0) L_h with
 * L_h = I + Gamma P e_(sigma,Theta) + zeta0 P e_(q,Theta).
 */
struct DiscreteSystem {
  Grid1D grid;
  StaggeredLayout layout;
  DiscreteSpatialOperator ops;
  SparseMatrix m0;
  SparseMatrix feed;  // realization feedthrough D
  SparseMatrix c;     // N_U x N_x
  SparseMatrix b;     // N_x x N_U
  Eigen::VectorXd lambda;
  std::vector<Index> aux_target;  // unknown index each auxiliary state reads from

  SparseMatrix p_avg;
  Eigen::VectorXd rho_node, nu_node, n0_node;
  Eigen::VectorXd c_face, c_inv_face, gamma_face, a0_face, zeta_face;
  bool spatially_constant = true;

  Index n_unknowns() const { return layout.total(); }
  Index n_aux() const { return lambda.size(); }
};

namespace detail {

struct ScalarRealization {
  double feedthrough = 0.0;
  std::vector<double> poles;
  std::vector<double> residues;
};

class RealizationCache {
 public:
  const ScalarRealization& get(const RationalMatrixFunction& r) {
    for (const auto& [fn, real] : entries_)
      if (fn == r) return real;
    if (r.rows() != 1 || r.cols() != 1) throw InvalidInput("discretize: 1-D laws need scalar a1, a2");
    const auto s = realize_state_space(r);
    if (!s.is_real()) throw InvalidInput("discretize: realization has complex poles or residues; not supported by the real time stepper");
    ScalarRealization out;
    out.feedthrough = s.feedthrough()(0, 0).real();
    for (std::size_t i = 0; i < s.poles().size(); ++i) {
      out.poles.push_back(s.poles()[i].real());
      out.residues.push_back(s.residues()[i](0, 0).real());
    }
    entries_.emplace_back(r, std::move(out));
    return entries_.back().second;
  }

 private:
  std::vector<std::pair<RationalMatrixFunction, ScalarRealization>> entries_;
};

inline double scalar_of(const Eigen::MatrixXd& m) { return m(0, 0); }

}  // namespace detail

inline DiscreteSystem discretize(const MaterialLaw& law, const Grid1D& grid) {
  grid.validate();
  if (law.n_cells() != grid.n_cells) throw InvalidInput("discretize: law has a different number of cells than the grid");
  for (const auto& c : law.cells)
    if (!(c.shape == BlockShape{})) throw InvalidInput("discretize: 1-D discretization needs scalar blocks");

  DiscreteSystem sys;
  sys.grid = grid;
  sys.layout = StaggeredLayout(grid);
  sys.ops = build_operators(grid);
  sys.p_avg = averaging_matrix(grid);
  sys.spatially_constant = law.is_spatially_constant();
  const auto& lay = sys.layout;
  const Index nn = grid.n_nodes(), nf = grid.n_faces(), n_u = lay.total();

  sys.rho_node.resize(nn);
  sys.nu_node.resize(nn);
  sys.n0_node.resize(nn);
  for (Index j = 0; j < nn; ++j) {
    const CellLaw& l = law.cells[static_cast<std::size_t>(j)];
    const CellLaw& r = law.cells[static_cast<std::size_t>(j + 1)];
    sys.rho_node(j) = 0.5 * (detail::scalar_of(l.rho0) + detail::scalar_of(r.rho0));
    sys.nu_node(j) = 0.5 * (detail::scalar_of(l.nu) + detail::scalar_of(r.nu));
    sys.n0_node(j) = 0.5 * (l.n0 + r.n0);
  }
  sys.c_face.resize(nf);
  sys.c_inv_face.resize(nf);
  sys.gamma_face.resize(nf);
  sys.a0_face.resize(nf);
  sys.zeta_face.resize(nf);
  for (Index i = 0; i < nf; ++i) {
    const CellLaw& c = law.cells[static_cast<std::size_t>(i)];
    sys.c_inv_face(i) = detail::scalar_of(c.c_inv);
    sys.c_face(i) = 1.0 / sys.c_inv_face(i);
    sys.gamma_face(i) = detail::scalar_of(c.gamma);
    sys.a0_face(i) = detail::scalar_of(c.a0);
    sys.zeta_face(i) = detail::scalar_of(c.zeta0);
  }

  // L_h and the core diagonal
  std::vector<Triplet> lt;
  for (Index k = 0; k < n_u; ++k) lt.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
  for (int k = 0; k < sys.p_avg.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(sys.p_avg, k); it; ++it) {
      const Index face = it.row(), node = it.col();
      lt.emplace_back(static_cast<int>(lay.sigma() + face), static_cast<int>(lay.theta() + node), sys.gamma_face(face) * it.value());
      lt.emplace_back(static_cast<int>(lay.q() + face), static_cast<int>(lay.theta() + node), sys.zeta_face(face) * it.value());
    }
  }
  SparseMatrix l(n_u, n_u);
  l.setFromTriplets(lt.begin(), lt.end());
  l.prune(0.0);
  Eigen::VectorXd core(n_u);
  core.segment(lay.v(), nn) = sys.rho_node;
  core.segment(lay.sigma(), nf) = sys.c_inv_face;
  core.segment(lay.theta(), nn) = sys.nu_node;
  core.segment(lay.q(), nf) = sys.a0_face;
  sys.m0 = SparseMatrix(l.transpose()) * core.asDiagonal() * l;
  sys.m0.prune(0.0);

  // realizations: a1 at vertices (average of neighbours), a2 at midpoints
  detail::RealizationCache cache;
  std::vector<Triplet> ft, ct, bt;
  std::vector<double> poles;
  const auto attach = [&](Index target, const detail::ScalarRealization& r, double weight) {
    if (r.feedthrough != 0.0) ft.emplace_back(static_cast<int>(target), static_cast<int>(target), weight * r.feedthrough);
    for (std::size_t i = 0; i < r.poles.size(); ++i) {
      const int idx = static_cast<int>(poles.size());
      poles.push_back(r.poles[i]);
      sys.aux_target.push_back(target);
      bt.emplace_back(idx, static_cast<int>(target), 1.0);
      ct.emplace_back(static_cast<int>(target), idx, weight * r.residues[i]);
    }
  };
  for (Index j = 0; j < nn; ++j) {
    const auto& al = law.cells[static_cast<std::size_t>(j)].a1;
    const auto& ar = law.cells[static_cast<std::size_t>(j + 1)].a1;
    if (al == ar) {
      attach(lay.theta() + j, cache.get(al), 1.0);
    } else {
      attach(lay.theta() + j, cache.get(al), 0.5);
      attach(lay.theta() + j, cache.get(ar), 0.5);
    }
  }
  for (Index i = 0; i < nf; ++i) attach(lay.q() + i, cache.get(law.cells[static_cast<std::size_t>(i)].a2), 1.0);

  const Index n_x = static_cast<Index>(poles.size());
  sys.feed.resize(n_u, n_u);
  sys.feed.setFromTriplets(ft.begin(), ft.end());
  sys.c.resize(n_u, n_x);
  sys.c.setFromTriplets(ct.begin(), ct.end());
  sys.b.resize(n_x, n_u);
  sys.b.setFromTriplets(bt.begin(), bt.end());
  sys.lambda = Eigen::Map<const Eigen::VectorXd>(poles.data(), n_x);
  return sys;
}

/// Separable forcing term g(t) * profile placed in the v block (f) or the Theta block (h).
struct ForcingTerm {
  Block block = Block::Theta;
  Eigen::VectorXd profile;  // vertex values
  std::function<double(double)> temporal;
};

/// exp(-(t - c)^2 / (2 w^2)), cut to zero beyond 8 widths.
inline std::function<double(double)> gaussian_pulse(double center, double width) {
  if (!(width > 0.0)) throw InvalidInput("gaussian_pulse: width must be positive");
  return [=](double t) {
    const double x = (t - center) / width;
    return std::abs(x) > 8.0 ? 0.0 : std::exp(-0.5 * x * x);
  };
}

/// C-infinity transition from 0 (t <= delay) to 1 (t >= delay + width).
inline std::function<double(double)> delayed_step(double delay, double width) {
  if (!(width > 0.0)) throw InvalidInput("delayed_step: width must be positive");
  return [=](double t) {
    const double s = (t - delay) / width;
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
  };
}

/// Vertex samples of sin(k pi x / L).
inline Eigen::VectorXd mode_profile(const Grid1D& g, Index k) {
  if (k < 1 || k > g.n_nodes()) throw InvalidInput("mode_profile: mode index out of range");
  Eigen::VectorXd p(g.n_nodes());
  for (Index j = 0; j < g.n_nodes(); ++j) p(j) = std::sin(static_cast<double>(k) * std::numbers::pi * g.node(j) / g.length);
  return p;
}

/// Vertex samples of the C-infinity bump exp(1 - 1/(1 - r^2)), r = (x - center)/width.
inline Eigen::VectorXd bump_profile(const Grid1D& g, double center, double width) {
  if (!(width > 0.0)) throw InvalidInput("bump_profile: width must be positive");
  Eigen::VectorXd p(g.n_nodes());
  for (Index j = 0; j < g.n_nodes(); ++j) {
    const double r = (g.node(j) - center) / width;
    p(j) = std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
  }
  return p;
}

struct EvolutionProblem {
  DiscreteSystem system;
  std::vector<ForcingTerm> forcing;
  double t_max = 1.0;
  double dt = 1.0 / 64.0;
  double rho = 1.0;
  Scheme scheme = Scheme::BackwardEuler;

  Index steps() const { return WeightedSignal::grid_size(0.0, t_max, dt) - 1; }
  double time(Index n) const { return static_cast<double>(n) * dt; }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("EvolutionProblem: dt must be positive");
    if (!(t_max > 0.0)) throw InvalidInput("EvolutionProblem: t_max must be positive");
    if (!(rho > 0.0)) throw InvalidInput("EvolutionProblem: rho must be positive");
    for (const auto& f : forcing) {
      if (f.block != Block::V && f.block != Block::Theta) throw InvalidInput("EvolutionProblem: forcing acts on v (f) or Theta (h) only");
      if (f.profile.size() != system.grid.n_nodes()) throw InvalidInput("EvolutionProblem: forcing profile has the wrong length");
      if (!f.temporal) throw InvalidInput("EvolutionProblem: forcing without time profile");
    }
  }

  Eigen::VectorXd forcing_at(double t) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(system.n_unknowns());
    for (const auto& term : forcing) {
      const Index off = term.block == Block::V ? system.layout.v() : system.layout.theta();
      f.segment(off, term.profile.size()) += term.temporal(t) * term.profile;
    }
    return f;
  }

  /// F sampled on the time grid (rows) over all unknowns (columns).
  WeightedSignal forcing_signal() const {
    Eigen::MatrixXd s(steps() + 1, system.n_unknowns());
    for (Index n = 0; n <= steps(); ++n) s.row(n) = forcing_at(time(n)).transpose();
    return {0.0, dt, rho, std::move(s)};
  }
};

inline EvolutionProblem make_problem(const MaterialLaw& law, const Grid1D& grid, std::vector<ForcingTerm> forcing, double t_max,
                                     double dt, double rho, Scheme scheme) {
  EvolutionProblem p{discretize(law, grid), std::move(forcing), t_max, dt, rho, scheme};
  p.validate();
  return p;
}

struct Trajectory {
  StaggeredLayout layout;
  double dt = 1.0;
  double rho = 1.0;
  Scheme scheme = Scheme::BackwardEuler;
  Eigen::MatrixXd u;  // (steps + 1) x N_U
  Eigen::MatrixXd x;  // (steps + 1) x N_x

  Index steps() const { return u.rows() - 1; }
  double time(Index n) const { return static_cast<double>(n) * dt; }

  /// Block 0..3 = v, sigma, Theta, q as a signal over its grid points.
  WeightedSignal block(int b) const {
    return {0.0, dt, rho, u.middleCols(layout.offset(b), layout.size(b))};
  }
};

/// One implicit step map with the step matrix factorized once.
class ImplicitStepper {
 public:
  ImplicitStepper(const DiscreteSystem& sys, double dt, Scheme scheme) : sys_{sys}, dt_{dt}, scheme_{scheme} {
    if (!(dt > 0.0)) throw InvalidInput("ImplicitStepper: dt must be positive");
    const Index n_x = sys.n_aux();
    gain_.resize(n_x);
    decay_.resize(n_x);
    for (Index i = 0; i < n_x; ++i) {
      const double l = sys.lambda(i);
      if (scheme == Scheme::BackwardEuler) {
        gain_(i) = dt / (1.0 - dt * l);
        decay_(i) = 1.0 / (1.0 - dt * l);
      } else {
        gain_(i) = 0.5 * dt / (1.0 - 0.5 * dt * l);
        decay_(i) = (1.0 + 0.5 * dt * l) / (1.0 - 0.5 * dt * l);
      }
    }
    const SparseMatrix k = sys.feed + sys.ops.a;
    const SparseMatrix aux = sys.c * gain_.asDiagonal() * sys.b;
    const SparseMatrix m_dt = sys.m0 / dt;
    if (scheme == Scheme::BackwardEuler) {
      lhs_ = m_dt + k + aux;
    } else {
      lhs_ = m_dt + 0.5 * (k + aux);
      rhs_ = m_dt - 0.5 * (k + aux);
    }
    lhs_.makeCompressed();
    lu_.analyzePattern(lhs_);
    lu_.factorize(lhs_);
    if (lu_.info() != Eigen::Success) {
      std::ostringstream os;
      os << "step matrix is singular for dt = " << dt << " (size " << lhs_.rows() << ", " << lu_.lastErrorMessage() << ")";
      throw SingularSystem(os.str());
    }
  }

  /// Advances (U^n, x^n) with forcing samples F^n, F^{n+1}.
  void step(Eigen::VectorXd& u, Eigen::VectorXd& x, const Eigen::VectorXd& f_now, const Eigen::VectorXd& f_next) const {
    if (scheme_ == Scheme::BackwardEuler) {
      const Eigen::VectorXd r = sys_.m0 * u / dt_ + f_next - sys_.c * decay_.cwiseProduct(x);
      const Eigen::VectorXd un = lu_.solve(r);
      x = decay_.cwiseProduct(x) + gain_.cwiseProduct(sys_.b * un);
      u = un;
    } else {
      const Eigen::VectorXd r = rhs_ * u + 0.5 * (f_now + f_next) - 0.5 * (sys_.c * (x + decay_.cwiseProduct(x)));
      const Eigen::VectorXd un = lu_.solve(r);
      x = decay_.cwiseProduct(x) + gain_.cwiseProduct(sys_.b * (un + u));
      u = un;
    }
  }

 private:
  const DiscreteSystem& sys_;
  double dt_;
  Scheme scheme_;
  Eigen::VectorXd gain_, decay_;
  SparseMatrix lhs_, rhs_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

/// Marches from U^0 = 0, x^0 = 0 over the problem's time grid.
inline Trajectory solve(const EvolutionProblem& p) {
  p.validate();
  const ImplicitStepper stepper(p.system, p.dt, p.scheme);
  const Index n = p.steps();
  Trajectory tr;
  tr.layout = p.system.layout;
  tr.dt = p.dt;
  tr.rho = p.rho;
  tr.scheme = p.scheme;
  tr.u = Eigen::MatrixXd::Zero(n + 1, p.system.n_unknowns());
  tr.x = Eigen::MatrixXd::Zero(n + 1, p.system.n_aux());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p.system.n_unknowns());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.system.n_aux());
  Eigen::VectorXd f_now = p.forcing_at(0.0);
  for (Index k = 0; k < n; ++k) {
    const Eigen::VectorXd f_next = p.forcing_at(p.time(k + 1));
    stepper.step(u, x, f_now, f_next);
    if (!u.allFinite()) throw SingularSystem("solve: non-finite state at step " + std::to_string(k + 1));
    tr.u.row(k + 1) = u.transpose();
    tr.x.row(k + 1) = x.transpose();
    f_now = f_next;
  }
  return tr;
}

/// Time integral from zero matching the scheme: right rectangle (BE) or trapezoid (TR).
inline Eigen::MatrixXd scheme_antiderivative(const Eigen::MatrixXd& g, double dt, Scheme scheme) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.rows(), g.cols());
  for (Index n = 1; n < g.rows(); ++n) {
    if (scheme == Scheme::BackwardEuler) {
      out.row(n) = out.row(n - 1) + dt * g.row(n);
    } else {
      out.row(n) = out.row(n - 1) + 0.5 * dt * (g.row(n) + g.row(n - 1));
    }
  }
  return out;
}

/// Displacement u = integral of v at the vertices.
inline WeightedSignal displacement(const Trajectory& tr) {
  return {0.0, tr.dt, tr.rho, scheme_antiderivative(tr.block(0).samples(), tr.dt, tr.scheme)};
}

/// Strain epsilon = D_grad u at the midpoints.
inline WeightedSignal strain(const Trajectory& tr, const DiscreteSystem& sys) {
  const Eigen::MatrixXd u = displacement(tr).samples();
  return {0.0, tr.dt, tr.rho, u * Eigen::MatrixXd(sys.ops.d_grad).transpose()};
}

/// Temperature theta recovered from Theta = (1 + n0 d/dt) theta at every vertex.
inline WeightedSignal temperature(const Trajectory& tr, const DiscreteSystem& sys) {
  const WeightedSignal big = tr.block(2);
  Eigen::MatrixXd out(big.size(), big.components());
  for (Index j = 0; j < big.components(); ++j)
    out.col(j) = recover_theta(big.with_samples(big.samples().col(j)), sys.n0_node(j)).samples().col(0);
  return big.with_samples(std::move(out));
}

/**
 * @brief Entropy density at the vertices,
 *   rho0 eta = Gamma^* eps + (nu + zeta0^* a0 zeta0) Theta + zeta0^* a0 q + integral of a1 Theta,
 * with midpoint quantities brought to the vertices by P^T.
 */
inline WeightedSignal compute_entropy(const Trajectory& tr, const DiscreteSystem& sys) {
  const auto& lay = sys.layout;
  if (tr.u.cols() != lay.total() || tr.x.cols() != sys.n_aux()) throw InvalidInput("compute_entropy: trajectory does not match the system");
  const Eigen::MatrixXd eps = strain(tr, sys).samples();
  const Eigen::MatrixXd theta = tr.u.middleCols(lay.theta(), lay.n_nodes);
  const Eigen::MatrixXd q = tr.u.middleCols(lay.q(), lay.n_faces);
  const Eigen::MatrixXd p = Eigen::MatrixXd(sys.p_avg);
  const Eigen::VectorXd za = sys.zeta_face.cwiseProduct(sys.a0_face);

  // a1 Theta from the feedthrough and the auxiliary states that feed the Theta rows
  const SparseMatrix feed_t = sys.feed.block(lay.theta(), lay.theta(), lay.n_nodes, lay.n_nodes);
  const SparseMatrix c_t = sys.c.middleRows(lay.theta(), lay.n_nodes);
  const Eigen::MatrixXd a1_theta = theta * Eigen::MatrixXd(feed_t).transpose() + tr.x * Eigen::MatrixXd(c_t).transpose();

  Eigen::MatrixXd rho_eta = (eps * sys.gamma_face.asDiagonal()) * p;  // rows are times: (P^T diag(Gamma) eps)^T
  rho_eta += theta * sys.nu_node.asDiagonal();
  rho_eta += (theta * p.transpose() * (za.cwiseProduct(sys.zeta_face)).asDiagonal()) * p;
  rho_eta += (q * za.asDiagonal()) * p;
  rho_eta += scheme_antiderivative(a1_theta, tr.dt, tr.scheme);
  return {0.0, tr.dt, tr.rho, rho_eta * sys.rho_node.cwiseInverse().asDiagonal()};
}

/// E^n = <M0 U^n, U^n>.
inline Eigen::VectorXd energy_functional(const Trajectory& tr, const DiscreteSystem& sys) {
  Eigen::VectorXd e(tr.u.rows());
  for (Index n = 0; n < tr.u.rows(); ++n) {
    const Eigen::VectorXd un = tr.u.row(n).transpose();
    e(n) = un.dot(sys.m0 * un);
  }
  return e;
}

/// Index of the first step with t >= t_cut at which the energy increases beyond a round-off floor, or -1.
inline Index first_energy_increase(const Eigen::VectorXd& e, const Trajectory& tr, double t_cut, double rel_floor = 64.0 * 2.220446049250313e-16) {
  const double scale = e.cwiseAbs().maxCoeff();
  for (Index n = 1; n < e.size(); ++n)
    if (tr.time(n - 1) >= t_cut && e(n) > e(n - 1) + rel_floor * scale) return n;
  return -1;
}

struct CausalityResult {
  bool skipped = false;
  double leakage = 0.0;
  std::string diagnostic;
};

/// First grid time at which the sampled forcing is nonzero (infinity if never).
inline double forcing_onset(const EvolutionProblem& p) {
  for (Index n = 0; n <= p.steps(); ++n)
    if (p.forcing_at(p.time(n)).cwiseAbs().maxCoeff() > 0.0) return p.time(n);
  return std::numeric_limits<double>::infinity();
}

/// max_{t < t0 - 2 dt} |U(t)| / max_t |U(t)| for the marching solver.
inline CausalityResult causality_test(const EvolutionProblem& p, double t0) {
  CausalityResult res;
  const double onset = forcing_onset(p);
  if (onset <= p.dt) {
    res.skipped = true;
    res.diagnostic = "forcing support touches the start of the window";
    return res;
  }
  if (onset < t0) {
    res.skipped = true;
    res.diagnostic = "forcing does not vanish before t0";
    return res;
  }
  const Trajectory tr = solve(p);
  const double peak = tr.u.cwiseAbs().maxCoeff();
  if (peak == 0.0) return res;
  double before = 0.0;
  for (Index n = 0; n <= tr.steps() && tr.time(n) < t0 - 2.0 * p.dt; ++n) before = std::max(before, tr.u.row(n).cwiseAbs().maxCoeff());
  res.leakage = before / peak;
  return res;
}

/// Symbol of the pointwise flux law: q = -z (a0 + z a2(z))^{-1} g for a scalar cell, with the common z cancelled.
inline RationalMatrixFunction flux_law_symbol(const CellLaw& cell) {
  if (!(cell.shape == BlockShape{})) throw InvalidInput("flux_law_symbol: scalar cells only");
  const double a0 = cell.a0(0, 0);
  const auto& n = cell.a2.numerator();
  const auto& d = cell.a2.denominator();
  // -z d / (a0 d + z n), then divide numerator and denominator by z when a0 = 0
  std::vector<cplx> den(std::max(d.size(), n.size() + 1), cplx{0.0});
  for (std::size_t i = 0; i < d.size(); ++i) den[i] += a0 * d[i];
  for (std::size_t i = 0; i < n.size(); ++i) den[i + 1] += n[i](0, 0);
  std::vector<Eigen::MatrixXcd> num(d.size() + 1, Eigen::MatrixXcd::Zero(1, 1));
  for (std::size_t i = 0; i < d.size(); ++i) num[i + 1](0, 0) = -d[i];
  if (den.front() == cplx{0.0}) {
    den.erase(den.begin());
    num.erase(num.begin());
  }
  return {num, den};
}

/// Leakage of the Fourier-Laplace path of the flux law before the onset t0 of @p input.
inline CausalityResult laplace_causality_test(const CellLaw& cell, const WeightedSignal& input, double t0) {
  CausalityResult res;
  for (Index i = 0; i < input.size() && input.time(i) < t0; ++i) {
    if (input.samples().row(i).cwiseAbs().maxCoeff() > 0.0) {
      res.skipped = true;
      res.diagnostic = "input does not vanish before t0";
      return res;
    }
  }
  if (t0 <= input.t_min() + input.dt()) {
    res.skipped = true;
    res.diagnostic = "input support touches the start of the window";
    return res;
  }
  const WeightedSignal out = apply_symbol_fl(flux_law_symbol(cell), input);
  const double peak = out.samples().cwiseAbs().maxCoeff();
  double before = 0.0;
  for (Index i = 0; i < out.size() && out.time(i) < t0 - 2.0 * out.dt(); ++i) before = std::max(before, out.samples().row(i).cwiseAbs().maxCoeff());
  res.leakage = peak > 0.0 ? before / peak : 0.0;
  return res;
}

struct BoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.05;
  bool holds() const { return lhs <= rhs * (1.0 + slack); }
};

/// |U|_rho against |F|_rho / c over the window; requires rho >= the weight at which c was certified.
inline BoundResult solution_bound_check(const EvolutionProblem& p, const WellPosednessReport& report, const Trajectory* precomputed = nullptr,
                                        double slack = 0.05) {
  if (report.verdict != Verdict::Satisfied) throw InvalidInput("solution_bound_check: well-posedness verdict is not satisfied");
  if (p.rho < report.rho_certified * (1.0 - 1e-12))
    throw InvalidInput("solution_bound_check: rho is below the weight at which c was certified");
  std::optional<Trajectory> own;
  if (!precomputed) own = solve(p);
  const Trajectory& tr = precomputed ? *precomputed : *own;

  const WeightedSignal u(0.0, tr.dt, p.rho, tr.u);
  double peak = 0.0;
  for (Index n = 0; n <= tr.steps(); ++n) peak = std::max(peak, std::exp(-p.rho * tr.time(n)) * tr.u.row(n).norm());
  const double tail = std::exp(-p.rho * tr.time(tr.steps())) * tr.u.row(tr.steps()).norm();
  if (peak > 0.0 && tail > 1e-6 * peak) throw WindowTooShort("solution_bound_check: weighted solution has not decayed at t_max");

  BoundResult r;
  r.slack = slack;
  r.lhs = weighted_norm(u);
  r.rhs = weighted_norm(p.forcing_signal()) / report.c_estimate;
  return r;
}

}  // namespace thermoevo
