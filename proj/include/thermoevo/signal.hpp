#pragma once

/**
 * @file signal.hpp
 * @brief Sampled time signals living in exponentially weighted L2 spaces.
 *
 * A WeightedSignal is a vector-valued function sampled on a uniform grid
 * t_i = t_min + i*dt, tagged with the weight rho > 0 of the norm
 *
 *   |f|_rho^2 = \int exp(-2 rho t) |f(t)|^2 dt,
 *
 * approximated by the trapezoidal rule on the sampled window. Values before
 * t_min are taken to be zero.
 */

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "thermoevo/errors.hpp"

namespace thermoevo {

using Index = Eigen::Index;

class WeightedSignal {
 public:
  /// @p samples holds one row per grid point and one column per component.
  WeightedSignal(double t_min, double dt, double rho, Eigen::MatrixXd samples)
      : t_min_{t_min}, dt_{dt}, rho_{rho}, samples_{std::move(samples)} {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InvalidInput("WeightedSignal: dt must be positive");
    if (!(rho_ > 0.0) || !std::isfinite(rho_)) throw InvalidInput("WeightedSignal: rho must be positive");
    if (!std::isfinite(t_min_)) throw InvalidInput("WeightedSignal: t_min must be finite");
    if (samples_.rows() < 2) throw InvalidInput("WeightedSignal: need at least two samples");
    if (samples_.cols() < 1) throw InvalidInput("WeightedSignal: need at least one component");
  }

  /// Samples @p fn on [t_min, t_max]; the sample count is round((t_max - t_min)/dt) + 1.
  static WeightedSignal sample(double t_min, double t_max, double dt, double rho, Index components,
                               const std::function<Eigen::VectorXd(double)>& fn) {
    const Index n = grid_size(t_min, t_max, dt);
    Eigen::MatrixXd s(n, components);
    for (Index i = 0; i < n; ++i) {
      const Eigen::VectorXd v = fn(t_min + static_cast<double>(i) * dt);
      if (v.size() != components) throw InvalidInput("WeightedSignal::sample: component count mismatch");
      s.row(i) = v.transpose();
    }
    return {t_min, dt, rho, std::move(s)};
  }

  static WeightedSignal sample_scalar(double t_min, double t_max, double dt, double rho,
                                      const std::function<double(double)>& fn) {
    return sample(t_min, t_max, dt, rho, 1, [&](double t) { return Eigen::VectorXd::Constant(1, fn(t)); });
  }

  static Index grid_size(double t_min, double t_max, double dt) {
    if (!(dt > 0.0) || !(t_max > t_min)) throw InvalidInput("invalid time window");
    return static_cast<Index>(std::llround((t_max - t_min) / dt)) + 1;
  }

  double t_min() const { return t_min_; }
  double dt() const { return dt_; }
  double rho() const { return rho_; }
  double t_max() const { return time(size() - 1); }
  double time(Index i) const { return t_min_ + static_cast<double>(i) * dt_; }
  Index size() const { return samples_.rows(); }
  Index components() const { return samples_.cols(); }

  const Eigen::MatrixXd& samples() const { return samples_; }
  Eigen::MatrixXd& samples() { return samples_; }

  WeightedSignal with_samples(Eigen::MatrixXd s) const { return {t_min_, dt_, rho_, std::move(s)}; }
  WeightedSignal with_rho(double rho) const { return {t_min_, dt_, rho, samples_}; }

  bool same_grid(const WeightedSignal& o) const {
    return size() == o.size() && t_min_ == o.t_min_ && dt_ == o.dt_;
  }

 private:
  double t_min_;
  double dt_;
  double rho_;
  Eigen::MatrixXd samples_;
};

inline void require_finite(const WeightedSignal& f, const char* where) {
  if (!f.samples().allFinite()) throw InvalidInput(std::string(where) + ": non-finite samples");
}

/// Trapezoidal approximation of |f|_rho over the sampled window.
inline double weighted_norm(const WeightedSignal& f) {
  require_finite(f, "weighted_norm");
  const Index n = f.size();
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * std::exp(-2.0 * f.rho() * f.time(i)) * f.samples().row(i).squaredNorm();
  }
  return std::sqrt(acc * f.dt());
}

/// Causal antiderivative g(t) = \int_{t_min}^t f(s) ds by the cumulative trapezoidal rule.
inline WeightedSignal antiderivative(const WeightedSignal& f) {
  require_finite(f, "antiderivative");
  Eigen::MatrixXd g(f.size(), f.components());
  g.row(0).setZero();
  const double half = 0.5 * f.dt();
  for (Index i = 1; i < f.size(); ++i) g.row(i) = g.row(i - 1) + half * (f.samples().row(i - 1) + f.samples().row(i));
  return f.with_samples(std::move(g));
}

}  // namespace thermoevo
