#pragma once

/**
 * @file realization.hpp
 * @brief Time-domain state-space realizations of rational material laws.
 *
 * With s = 1/z the transfer function G(s) = R(1/s) is always proper because
 * R is analytic at z = 0. Its partial-fraction expansion
 *
 *   G(s) = D + sum_i C_i / (s - lambda_i)
 *
 * gives the realization y = D u + sum_i C_i x_i, x_i' = lambda_i x_i + u,
 * with one state block (of the input width) per pole. Poles are
 * lambda_i = 1/p_i for the roots p_i of the denominator in z, plus a pole at
 * s = 0 when the numerator degree exceeds the denominator degree by one.
 */

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

#include "thermoevo/fourier_laplace.hpp"
#include "thermoevo/rational.hpp"
#include "thermoevo/signal.hpp"

namespace thermoevo {

class StateSpaceRealization {
 public:
  StateSpaceRealization(Eigen::MatrixXcd feedthrough, std::vector<cplx> poles, std::vector<Eigen::MatrixXcd> residues)
      : d_{std::move(feedthrough)}, poles_{std::move(poles)}, residues_{std::move(residues)} {
    if (poles_.size() != residues_.size()) throw InvalidInput("realization: pole/residue count mismatch");
  }

  Index rows() const { return d_.rows(); }
  Index cols() const { return d_.cols(); }
  Index state_dimension() const { return static_cast<Index>(poles_.size()) * cols(); }

  const Eigen::MatrixXcd& feedthrough() const { return d_; }
  const std::vector<cplx>& poles() const { return poles_; }
  const std::vector<Eigen::MatrixXcd>& residues() const { return residues_; }

  Eigen::MatrixXcd a_matrix() const {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(state_dimension(), state_dimension());
    for (std::size_t i = 0; i < poles_.size(); ++i) {
      const Index o = static_cast<Index>(i) * cols();
      a.block(o, o, cols(), cols()).diagonal().setConstant(poles_[i]);
    }
    return a;
  }

  Eigen::MatrixXcd b_matrix() const {
    Eigen::MatrixXcd b(state_dimension(), cols());
    for (std::size_t i = 0; i < poles_.size(); ++i) b.middleRows(static_cast<Index>(i) * cols(), cols()).setIdentity();
    return b;
  }

  Eigen::MatrixXcd c_matrix() const {
    Eigen::MatrixXcd c(rows(), state_dimension());
    for (std::size_t i = 0; i < poles_.size(); ++i) c.middleCols(static_cast<Index>(i) * cols(), cols()) = residues_[i];
    return c;
  }

  /// D + C (sI - A)^{-1} B.
  Eigen::MatrixXcd transfer(cplx s) const {
    Eigen::MatrixXcd g = d_;
    for (std::size_t i = 0; i < poles_.size(); ++i) g += residues_[i] / (s - poles_[i]);
    return g;
  }

  /// True when feedthrough, poles and residues are real to round-off.
  bool is_real(double tol = 1e-12) const {
    const double scale = std::max(1.0, d_.cwiseAbs().maxCoeff());
    if (d_.imag().cwiseAbs().maxCoeff() > tol * scale) return false;
    for (std::size_t i = 0; i < poles_.size(); ++i) {
      if (std::abs(poles_[i].imag()) > tol * std::max(1.0, std::abs(poles_[i]))) return false;
      if (residues_[i].imag().cwiseAbs().maxCoeff() > tol * std::max(1.0, residues_[i].cwiseAbs().maxCoeff())) return false;
    }
    return true;
  }

 private:
  Eigen::MatrixXcd d_;
  std::vector<cplx> poles_;
  std::vector<Eigen::MatrixXcd> residues_;
};

inline cplx int_power(cplx s, Index k) {
  cplx r{1.0};
  for (Index i = 0; i < k; ++i) r *= s;
  return r;
}

/// Roots of a polynomial with ascending coefficients via the companion matrix.
inline std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs) {
  const Index deg = static_cast<Index>(coeffs.size()) - 1;
  if (deg < 1) return {};
  const cplx lead = coeffs.back();
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
  for (Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (Index i = 0; i < deg; ++i) companion(i, deg - 1) = -coeffs[static_cast<std::size_t>(i)] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  return roots;
}

/**
 * @brief Partial-fraction realization of R(1/s).
 *
 * Repeated poles are rejected. Poles whose residue vanishes to round-off
 * (cancelled factors) are dropped.
 */
inline StateSpaceRealization realize_state_space(const RationalMatrixFunction& r) {
  const auto& num = r.numerator();
  const auto& den = r.denominator();
  const Index p = r.numerator_degree();
  const Index q = r.denominator_degree();
  const Index m = std::max(p, q);

  // Dn(s) = sum_j den_j s^{m-j}; roots are 1/p_i and (m - q) zeros at the origin.
  std::vector<cplx> poles;
  for (const cplx root : polynomial_roots(den)) poles.push_back(1.0 / root);
  if (m - q >= 2) throw RepeatedPole("realize_state_space: multiple pole at s = 0");
  if (m - q == 1) poles.emplace_back(0.0);

  for (std::size_t i = 0; i < poles.size(); ++i)
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      const double scale = std::max({1.0, std::abs(poles[i]), std::abs(poles[j])});
      if (std::abs(poles[i] - poles[j]) <= 1e-8 * scale)
        throw RepeatedPole("realize_state_space: repeated pole near s = " + std::to_string(poles[i].real()));
    }

  const Eigen::MatrixXcd feedthrough = num.front() / den.front();
  std::vector<Eigen::MatrixXcd> residues;
  residues.reserve(poles.size());
  double largest = feedthrough.cwiseAbs().maxCoeff();
  for (const cplx s : poles) {
    Eigen::MatrixXcd nn = Eigen::MatrixXcd::Zero(r.rows(), r.cols());
    for (Index j = 0; j <= p; ++j) nn += num[static_cast<std::size_t>(j)] * int_power(s, m - j);
    cplx dprime{0.0};
    for (Index j = 0; j < m && j <= q; ++j)
      dprime += static_cast<double>(m - j) * den[static_cast<std::size_t>(j)] * int_power(s, m - j - 1);
    residues.push_back(nn / dprime);
    largest = std::max(largest, residues.back().cwiseAbs().maxCoeff());
  }

  std::vector<cplx> kept_poles;
  std::vector<Eigen::MatrixXcd> kept_residues;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (residues[i].cwiseAbs().maxCoeff() <= 1e-13 * largest) continue;
    kept_poles.push_back(poles[i]);
    kept_residues.push_back(residues[i]);
  }
  return {feedthrough, std::move(kept_poles), std::move(kept_residues)};
}

/// phi1 = (e^{l h} - 1)/l and phi2 = (e^{l h} - 1 - l h)/(l^2 h), with series near l h = 0.
inline void exponential_weights(cplx lambda, double h, cplx& decay, cplx& phi1, cplx& phi2) {
  const cplx x = lambda * h;
  decay = std::exp(x);
  if (std::abs(x) < 1e-4) {
    phi1 = h * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
    phi2 = h * (0.5 + x / 6.0 + x * x / 24.0 + x * x * x / 120.0);
  } else {
    phi1 = (decay - 1.0) / lambda;
    phi2 = (decay - 1.0 - x) / (lambda * x);
  }
}

/**
 * @brief Causal time-domain response of a realization to @p u from zero state.
 *
 * Each pole is propagated exactly with the input interpolated linearly
 * between samples (first-order hold).
 */
inline WeightedSignal simulate_realization(const StateSpaceRealization& s, const WeightedSignal& u) {
  require_finite(u, "simulate_realization");
  if (s.cols() != u.components()) throw InvalidInput("simulate_realization: input width mismatch");
  const Index n = u.size();
  const Eigen::MatrixXcd uc = u.samples().cast<cplx>();
  Eigen::MatrixXcd y = uc * s.feedthrough().transpose();
  for (std::size_t i = 0; i < s.poles().size(); ++i) {
    cplx decay, phi1, phi2;
    exponential_weights(s.poles()[i], u.dt(), decay, phi1, phi2);
    Eigen::RowVectorXcd x = Eigen::RowVectorXcd::Zero(s.cols());
    const Eigen::MatrixXcd ct = s.residues()[i].transpose();
    for (Index k = 1; k < n; ++k) {
      x = decay * x + phi1 * uc.row(k - 1) + phi2 * (uc.row(k) - uc.row(k - 1));
      y.row(k) += x * ct;
    }
  }
  return u.with_samples(y.real());
}

/// Smooth Gaussian probe on [0, 12] with step 2^-10 used for realization checks.
inline WeightedSignal standard_probe(Index components = 1, double rho = 1.0) {
  const double dt = 1.0 / 1024.0;
  return WeightedSignal::sample(0.0, 12.0, dt, rho, components, [&](double t) {
    Eigen::VectorXd v(components);
    for (Index c = 0; c < components; ++c) {
      const double center = 4.0 + 0.5 * static_cast<double>(c);
      const double x = (t - center) / 0.5;
      v(c) = std::exp(-0.5 * x * x);
    }
    return v;
  });
}

/// Max deviation between the time-domain realization and the Fourier-Laplace path, relative to the latter's peak.
inline double validate_realization(const RationalMatrixFunction& r, const StateSpaceRealization& s, const WeightedSignal& probe) {
  const WeightedSignal reference = apply_symbol_fl(r, probe);
  const WeightedSignal timepath = simulate_realization(s, probe);
  const double peak = reference.samples().cwiseAbs().maxCoeff();
  const double diff = (reference.samples() - timepath.samples()).cwiseAbs().maxCoeff();
  return peak > 0.0 ? diff / peak : diff;
}

}  // namespace thermoevo
