#pragma once

/**
 * @file fourier_laplace.hpp
 * @brief Action of a material-law symbol M(z), z = 1/(i w + rho), on a sampled signal.
 *
 * The signal is weighted by exp(-rho t), transformed by a zero-padded FFT,
 * multiplied bin by bin with M(1/(i w + rho)) and transformed back before the
 * weight is removed again. This is the spectral definition of M applied to
 * the inverse time derivative and serves as the frequency-domain reference
 * path for the time-domain realizations.
 */

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

#include "thermoevo/rational.hpp"
#include "thermoevo/signal.hpp"

namespace thermoevo {

struct FourierLaplaceOptions {
  /// Window-end weighted magnitude allowed relative to the weighted peak.
  double decay_tolerance = 1e-8;
  /// Absolute |d(z)| below which a grid frequency counts as a pole hit.
  double pole_tolerance = 1e-12;
};

inline Index next_power_of_two(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Angular frequency of DFT bin @p k for @p n_pad samples with step @p dt.
inline double fft_frequency(Index k, Index n_pad, double dt) {
  const Index signed_k = (k < n_pad / 2) ? k : k - n_pad;
  return 2.0 * std::numbers::pi * static_cast<double>(signed_k) / (static_cast<double>(n_pad) * dt);
}

/**
 * @brief Applies M(partial_0^{-1}) to @p f through the Fourier-Laplace transform.
 *
 * Requires the weighted input to vanish (relative to its peak) at both window
 * ends. Symbols with real coefficients produce real outputs; the real part is
 * returned in general.
 */
inline WeightedSignal apply_symbol_fl(const RationalMatrixFunction& m, const WeightedSignal& f,
                                      const FourierLaplaceOptions& opts = {}) {
  require_finite(f, "apply_symbol_fl");
  if (m.cols() != f.components()) throw InvalidInput("apply_symbol_fl: symbol columns do not match signal components");

  const Index n = f.size();
  const double rho = f.rho();
  Eigen::MatrixXd weighted(n, f.components());
  for (Index i = 0; i < n; ++i) weighted.row(i) = std::exp(-rho * f.time(i)) * f.samples().row(i);

  const double peak = weighted.cwiseAbs().maxCoeff();
  if (peak == 0.0) return f.with_samples(Eigen::MatrixXd::Zero(n, m.rows()));
  const double ends = std::max(weighted.row(0).cwiseAbs().maxCoeff(), weighted.row(n - 1).cwiseAbs().maxCoeff());
  if (ends >= opts.decay_tolerance * peak)
    throw WindowingError("apply_symbol_fl: weighted signal does not decay at the window ends");

  const Index n_pad = next_power_of_two(2 * n);
  Eigen::FFT<double> fft;
  std::vector<std::vector<cplx>> spectra(static_cast<std::size_t>(f.components()));
  std::vector<cplx> buffer(static_cast<std::size_t>(n_pad));
  for (Index c = 0; c < f.components(); ++c) {
    std::fill(buffer.begin(), buffer.end(), cplx{0.0});
    for (Index i = 0; i < n; ++i) buffer[static_cast<std::size_t>(i)] = weighted(i, c);
    fft.fwd(spectra[static_cast<std::size_t>(c)], buffer);
  }

  std::vector<std::vector<cplx>> out(static_cast<std::size_t>(m.rows()), std::vector<cplx>(static_cast<std::size_t>(n_pad)));
  Eigen::VectorXcd in_bin(f.components());
  for (Index k = 0; k < n_pad; ++k) {
    const cplx z = 1.0 / cplx{rho, fft_frequency(k, n_pad, f.dt())};
    const cplx d = m.denominator_at(z);
    if (std::abs(d) < opts.pole_tolerance) throw PoleProximity("apply_symbol_fl: symbol has a pole on the sampled frequency line");
    for (Index c = 0; c < f.components(); ++c) in_bin(c) = spectra[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
    const Eigen::VectorXcd y = (m.numerator_at(z) * in_bin) / d;
    for (Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] = y(r);
  }

  Eigen::MatrixXd result(n, m.rows());
  std::vector<cplx> back;
  for (Index r = 0; r < m.rows(); ++r) {
    fft.inv(back, out[static_cast<std::size_t>(r)]);
    for (Index i = 0; i < n; ++i) result(i, r) = std::exp(rho * f.time(i)) * back[static_cast<std::size_t>(i)].real();
  }
  return f.with_samples(std::move(result));
}

}  // namespace thermoevo
