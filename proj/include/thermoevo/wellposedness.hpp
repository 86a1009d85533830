#pragma once

/**
 * @file wellposedness.hpp
 * @brief Numerical certification of the positivity hypotheses of the solution theory.
 *
 * For a material law M(z) = M0 + z M1(z) the solution operator of
 * (d/dt M(1/(d/dt)) + A) is causal and bounded by 1/c on H_rho whenever
 *
 *   Re z^-1 M(z) >= c > 0   for Re z^-1 >= rho0.
 *
 * For the rational catalog this reduces to positivity of rho M0 + Re M1(0)
 * for large rho, which in turn follows from cellwise conditions on
 * rho0, C, nu, a0 and Re a2(0). All checks here are sampled floating-point
 * certificates with an explicit relative cutoff, not proofs.
 */

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "thermoevo/errors.hpp"
#include "thermoevo/material.hpp"

namespace thermoevo {

enum class Verdict { Satisfied, Violated, Inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Witness {
  Index cell = 0;
  double eigenvalue = 0.0;
  Eigen::VectorXcd eigenvector;
};

struct WellPosednessReport {
  Verdict verdict = Verdict::Inconclusive;
  double c_estimate = 0.0;
  double rho_min = std::numeric_limits<double>::infinity();
  /// Weight at which c_estimate was sampled; bounds with c_estimate hold for rho >= rho_certified.
  double rho_certified = std::numeric_limits<double>::infinity();
  Classification classification = Classification::Generic;
  std::vector<Witness> witnesses;
  std::vector<std::string> checks_run;
};

struct WellPosednessOptions {
  double cutoff = 1e-10;
  double rho_lo = 1e-3;
  double rho_hi = 1e6;
  double rho_tol = 1e-6;
  /// Preferred weight for c_estimate; raised to rho_min when smaller.
  double rho_eval = 1.0;
  Index n_samples = 257;
  Index n_shells = 8;
  double t_lo = 1e-3;
  double t_hi = 1e4;
};

struct SpectralMinimum {
  double eigenvalue = std::numeric_limits<double>::infinity();
  Witness witness;
};

/// Smallest eigenvalue of a Hermitian matrix and its eigenvector.
inline std::pair<double, Eigen::VectorXcd> min_eigenpair(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(h));
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

/// rho M0 + Re M1(0) for one cell.
inline Eigen::MatrixXcd condition_matrix(const CellLaw& cell, double rho) {
  return rho * cell.m0().cast<cplx>() + hermitian_part(cell.m1_at_zero());
}

/// Global minimum over cells of the smallest eigenvalue of rho M0 + Re M1(0).
inline SpectralMinimum check_condition_rho(const MaterialLaw& law, double rho) {
  if (!(rho > 0.0)) throw InvalidInput("check_condition_rho: rho must be positive");
  SpectralMinimum best;
  for (Index c = 0; c < law.n_cells(); ++c) {
    const auto [lambda, vec] = min_eigenpair(condition_matrix(law.cells[static_cast<std::size_t>(c)], rho));
    if (lambda < best.eigenvalue) best = {lambda, {c, lambda, vec}};
  }
  return best;
}

/// Sample points t of the imaginary axis: 0 plus +-log-spaced magnitudes in [t_lo, t_hi].
inline std::vector<double> boundary_samples(const WellPosednessOptions& opts) {
  std::vector<double> ts{0.0};
  const Index half = std::max<Index>(1, (opts.n_samples - 1) / 2);
  const double a = std::log(opts.t_lo), b = std::log(opts.t_hi);
  for (Index i = 0; i < half; ++i) {
    const double t = std::exp(half == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(half - 1));
    ts.push_back(t);
    ts.push_back(-t);
  }
  return ts;
}

struct BoundaryMinimum {
  double eigenvalue = std::numeric_limits<double>::infinity();
  cplx worst_z{0.0};
  Witness witness;
};

/**
 * @brief min eig of Re z^-1 M(z) over z = (it + rho)^-1, rho in rho0 (1 + 2^-j), j < n_shells.
 *
 * @p symbol may return several cell symbols at once (one matrix per cell).
 */
inline BoundaryMinimum check_symbol_boundary(const std::function<std::vector<Eigen::MatrixXcd>(cplx)>& symbol, double rho0,
                                             const WellPosednessOptions& opts = {}) {
  if (!(rho0 > 0.0)) throw InvalidInput("check_symbol_boundary: rho0 must be positive");
  BoundaryMinimum best;
  for (Index j = 0; j < opts.n_shells; ++j) {
    const double rho = rho0 * (1.0 + std::ldexp(1.0, -static_cast<int>(j)));
    for (double t : boundary_samples(opts)) {
      const cplx zinv{rho, t};
      const cplx z = 1.0 / zinv;
      const auto mats = symbol(z);
      for (std::size_t c = 0; c < mats.size(); ++c) {
        const auto [lambda, vec] = min_eigenpair(zinv * mats[c]);
        if (lambda < best.eigenvalue) best = {lambda, z, {static_cast<Index>(c), lambda, vec}};
      }
    }
  }
  return best;
}

/// Law version; uses Re z^-1 M(z) = rho M0 + Re M1(z) on Re z^-1 = rho to avoid cancellation.
inline BoundaryMinimum check_symbol_boundary(const MaterialLaw& law, double rho0, const WellPosednessOptions& opts = {}) {
  if (!(rho0 > 0.0)) throw InvalidInput("check_symbol_boundary: rho0 must be positive");
  std::vector<Eigen::MatrixXcd> m0s;
  std::vector<RationalMatrixFunction> m1s;
  for (const auto& c : law.cells) {
    m0s.push_back(c.m0().cast<cplx>());
    m1s.push_back(c.m1());
  }
  BoundaryMinimum best;
  for (Index j = 0; j < opts.n_shells; ++j) {
    const double rho = rho0 * (1.0 + std::ldexp(1.0, -static_cast<int>(j)));
    for (double t : boundary_samples(opts)) {
      const cplx z = 1.0 / cplx{rho, t};
      for (std::size_t c = 0; c < m0s.size(); ++c) {
        const auto [lambda, vec] = min_eigenpair(rho * m0s[c] + hermitian_part(eval_rational(m1s[c], z)));
        if (lambda < best.eigenvalue) best = {lambda, z, {static_cast<Index>(c), lambda, vec}};
      }
    }
  }
  return best;
}

/// Smallest rho in [rho_lo, rho_hi] with min eig(rho M0 + Re M1(0)) >= c_target, by bisection.
inline double find_min_rho(const MaterialLaw& law, double c_target, const WellPosednessOptions& opts = {}) {
  if (!(c_target > 0.0)) throw InvalidInput("find_min_rho: c_target must be positive");
  const auto ok = [&](double rho) { return check_condition_rho(law, rho).eigenvalue >= c_target; };
  double lo = opts.rho_lo, hi = opts.rho_hi;
  if (ok(lo)) return lo;
  if (!ok(hi)) throw UnreachableTarget("find_min_rho: target not reached for rho <= " + std::to_string(hi));
  while (hi - lo > opts.rho_tol) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

namespace detail {

inline Eigen::VectorXcd embed(const CellLaw& cell, Block b, const Eigen::VectorXcd& local) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(cell.shape.total());
  v.segment(cell.shape.offset(b), cell.shape.size(b)) = local;
  return v;
}

inline double spectral_scale(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

enum class Outcome { Pass, Fail, Unknown };

struct Subcheck {
  Outcome outcome = Outcome::Pass;
  std::vector<Witness> witnesses;

  void fail(Witness w) {
    outcome = Outcome::Fail;
    witnesses.push_back(std::move(w));
  }
};

/// Strict positivity of a symmetric block: Fail on negative eigenvalues, Unknown on numerically zero ones.
inline void positive_block(Subcheck& s, const CellLaw& cell, Index c, Block b, const Eigen::MatrixXd& m, double cutoff) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double lambda = es.eigenvalues()(0);
  if (lambda > cutoff * scale) return;
  const Witness w{c, lambda, embed(cell, b, es.eigenvectors().col(0).cast<cplx>())};
  if (lambda < -cutoff * scale) {
    s.fail(w);
    return;
  }
  if (s.outcome == Outcome::Pass) s.outcome = Outcome::Unknown;
  s.witnesses.push_back(w);
}

}  // namespace detail

/**
 * @brief Cellwise structural conditions plus the rho search and the sampled symbol check.
 *
 * Sub-checks: rho0_positive, C_positive, nu_positive, a0_selfadjoint,
 * a0_positive_on_range, re_a2_positive_on_kernel_a0, condition_rho_search,
 * symbol_boundary_line. Any failure gives Violated; a numerically singular
 * nu (with everything else passing) gives Inconclusive.
 */
inline WellPosednessReport check_theorem_2(const MaterialLaw& law, const WellPosednessOptions& opts = {}) {
  using detail::Outcome;
  using detail::Subcheck;
  WellPosednessReport rep;
  rep.classification = classify(law, opts.cutoff);

  Subcheck rho0_chk, c_chk, nu_chk, a0_sym, a0_range, a2_kernel;
  for (Index c = 0; c < law.n_cells(); ++c) {
    const CellLaw& cell = law.cells[static_cast<std::size_t>(c)];
    detail::positive_block(rho0_chk, cell, c, Block::V, cell.rho0, opts.cutoff);
    detail::positive_block(c_chk, cell, c, Block::Sigma, cell.c_inv, opts.cutoff);
    detail::positive_block(nu_chk, cell, c, Block::Theta, cell.nu, opts.cutoff);
    // rho0 and C^-1 must be strictly positive; a zero eigenvalue there is a failure, not an open case.
    if (rho0_chk.outcome == Outcome::Unknown) rho0_chk.outcome = Outcome::Fail;
    if (c_chk.outcome == Outcome::Unknown) c_chk.outcome = Outcome::Fail;

    const double a0_norm = detail::spectral_scale(0.5 * (cell.a0 + cell.a0.transpose()));
    if ((cell.a0 - cell.a0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(a0_norm, 1.0)) {
      a0_sym.fail({c, 0.0, detail::embed(cell, Block::Q, Eigen::VectorXcd::Zero(cell.shape.size(Block::Q)))});
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cell.a0 + cell.a0.transpose()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    std::vector<Index> kernel;
    for (Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i)) <= opts.cutoff * a0_norm) {
        kernel.push_back(i);
      } else if (ev(i) < 0.0) {
        a0_range.fail({c, ev(i), detail::embed(cell, Block::Q, es.eigenvectors().col(i).cast<cplx>())});
      }
    }
    if (!kernel.empty()) {
      Eigen::MatrixXcd basis(ev.size(), static_cast<Index>(kernel.size()));
      for (std::size_t i = 0; i < kernel.size(); ++i) basis.col(static_cast<Index>(i)) = es.eigenvectors().col(kernel[i]).cast<cplx>();
      const Eigen::MatrixXcd re_a2 = hermitian_part(cell.a2.at_zero());
      const Eigen::MatrixXcd projected = basis.adjoint() * re_a2 * basis;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ks(projected);
      const double scale = std::max(re_a2.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
      if (!(ks.eigenvalues()(0) > opts.cutoff * scale))
        a2_kernel.fail({c, ks.eigenvalues()(0), detail::embed(cell, Block::Q, basis * ks.eigenvectors().col(0))});
    }
  }

  const auto record = [&](const char* name, const Subcheck& s) {
    rep.checks_run.emplace_back(name);
    rep.witnesses.insert(rep.witnesses.end(), s.witnesses.begin(), s.witnesses.end());
  };
  record("rho0_positive", rho0_chk);
  record("C_positive", c_chk);
  record("nu_positive", nu_chk);
  record("a0_selfadjoint", a0_sym);
  record("a0_positive_on_range", a0_range);
  record("re_a2_positive_on_kernel_a0", a2_kernel);

  // rho_min: smallest rho whose condition matrix is positive beyond round-off, relative to its scale.
  double m0_norm = 0.0, m1_norm = 0.0;
  for (const auto& cell : law.cells) {
    m0_norm = std::max(m0_norm, detail::spectral_scale(cell.m0()));
    m1_norm = std::max(m1_norm, hermitian_part(cell.m1_at_zero()).cwiseAbs().rowwise().sum().maxCoeff());
  }
  const auto positive_at = [&](double rho) {
    return check_condition_rho(law, rho).eigenvalue > opts.cutoff * (rho * m0_norm + m1_norm);
  };
  Subcheck rho_chk;
  rep.checks_run.emplace_back("condition_rho_search");
  if (positive_at(opts.rho_lo)) {
    rep.rho_min = opts.rho_lo;
  } else if (positive_at(opts.rho_hi)) {
    double lo = opts.rho_lo, hi = opts.rho_hi;
    while (hi - lo > opts.rho_tol * std::max(1.0, lo)) {
      const double mid = 0.5 * (lo + hi);
      (positive_at(mid) ? hi : lo) = mid;
    }
    rep.rho_min = hi;
  } else {
    rho_chk.outcome = Outcome::Fail;
    rep.rho_min = std::numeric_limits<double>::infinity();
  }

  Subcheck line_chk;
  rep.checks_run.emplace_back("symbol_boundary_line");
  double rho_c = std::isfinite(rep.rho_min) ? std::max(opts.rho_eval, rep.rho_min) : opts.rho_eval;
  BoundaryMinimum line = check_symbol_boundary(law, rho_c, opts);
  if (std::isfinite(rep.rho_min)) {
    for (int k = 0; k < 40 && !(line.eigenvalue > 0.0); ++k) {
      rho_c *= 2.0;
      if (rho_c > opts.rho_hi) break;
      line = check_symbol_boundary(law, rho_c, opts);
    }
  }
  if (!(line.eigenvalue > 0.0)) line_chk.outcome = Outcome::Fail;
  rep.c_estimate = line.eigenvalue;
  rep.rho_certified = rho_c;

  // Most negative direction of the reduced condition at the certified weight, always reported.
  const SpectralMinimum cond = check_condition_rho(law, std::isfinite(rep.rho_min) ? rep.rho_min : opts.rho_hi);
  if (rho_chk.outcome == Outcome::Fail || rep.witnesses.empty()) rep.witnesses.push_back(cond.witness);
  if (line_chk.outcome == Outcome::Fail) rep.witnesses.push_back(line.witness);
  // drop repeats of the same direction found by different sub-checks
  std::vector<Witness> unique;
  for (const auto& w : rep.witnesses) {
    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Witness& u) {
      return u.cell == w.cell && u.eigenvector.size() == w.eigenvector.size() &&
             std::abs(u.eigenvalue - w.eigenvalue) <= 1e-12 * std::max(1.0, std::abs(w.eigenvalue)) &&
             std::abs(std::abs(u.eigenvector.dot(w.eigenvector)) - 1.0) <= 1e-12;
    });
    if (!seen) unique.push_back(w);
  }
  rep.witnesses = std::move(unique);

  const std::vector<const Subcheck*> all{&rho0_chk, &c_chk, &nu_chk, &a0_sym, &a0_range, &a2_kernel, &rho_chk, &line_chk};
  bool failed = false, unknown = false;
  for (const auto* s : all) {
    failed = failed || s->outcome == Outcome::Fail;
    unknown = unknown || s->outcome == Outcome::Unknown;
  }
  rep.verdict = failed ? Verdict::Violated : (unknown ? Verdict::Inconclusive : Verdict::Satisfied);
  if (rep.verdict != Verdict::Satisfied) rep.rho_certified = std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace thermoevo
