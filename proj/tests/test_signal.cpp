#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thermoevo/fourier_laplace.hpp"
#include "thermoevo/signal.hpp"

using namespace thermoevo;

namespace {

WeightedSignal pulse(double rho, double dt = 1.0 / 512.0) {
  return WeightedSignal::sample_scalar(0.0, 10.0, dt, rho, [](double t) {
    const double x = (t - 3.0) / 0.4;
    return std::exp(-0.5 * x * x);
  });
}

}  // namespace

TEST(WeightedSignal, RejectsInvalidGrids) {
  EXPECT_THROW(WeightedSignal(0.0, 0.0, 1.0, Eigen::MatrixXd::Zero(3, 1)), InvalidInput);
  EXPECT_THROW(WeightedSignal(0.0, 0.1, 0.0, Eigen::MatrixXd::Zero(3, 1)), InvalidInput);
  EXPECT_THROW(WeightedSignal(0.0, 0.1, -1.0, Eigen::MatrixXd::Zero(3, 1)), InvalidInput);
  EXPECT_THROW(WeightedSignal(0.0, 0.1, 1.0, Eigen::MatrixXd::Zero(1, 1)), InvalidInput);
}

TEST(WeightedNorm, ZeroSignal) {
  const WeightedSignal f(0.0, 0.01, 1.0, Eigen::MatrixXd::Zero(101, 2));
  EXPECT_EQ(weighted_norm(f), 0.0);
}

TEST(WeightedNorm, ConstantOnUnitInterval) {
  const double exact = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
  double previous_error = 0.0;
  for (double dt : {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0}) {
    const auto f = WeightedSignal::sample_scalar(0.0, 1.0, dt, 1.0, [](double) { return 1.0; });
    const double err = std::abs(weighted_norm(f) - exact);
    EXPECT_LE(err, dt * dt);
    if (previous_error > 0.0) {
      EXPECT_NEAR(previous_error / err, 4.0, 0.1);
    }
    previous_error = err;
  }
}

TEST(WeightedNorm, Homogeneous) {
  const auto f = pulse(1.0);
  const auto g = f.with_samples(3.0 * f.samples());
  EXPECT_NEAR(weighted_norm(g), 3.0 * weighted_norm(f), 1e-14 * weighted_norm(g));
}

TEST(WeightedNorm, RejectsNonFinite) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 1);
  s(2, 0) = std::nan("");
  EXPECT_THROW(weighted_norm(WeightedSignal(0.0, 0.1, 1.0, s)), InvalidInput);
}

TEST(Antiderivative, ZeroAndConstant) {
  const WeightedSignal zero(0.0, 0.01, 1.0, Eigen::MatrixXd::Zero(201, 1));
  EXPECT_EQ(antiderivative(zero).samples().cwiseAbs().maxCoeff(), 0.0);
  const auto one = WeightedSignal::sample_scalar(0.0, 2.0, 0.01, 1.0, [](double) { return 1.0; });
  const auto g = antiderivative(one);
  for (Index i = 0; i < g.size(); ++i) EXPECT_NEAR(g.samples()(i, 0), g.time(i), 1e-12);
}

TEST(Antiderivative, ContractionByOneOverRho) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double rho : {1.0, 2.0, 5.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      const double c = 1.0 + 4.0 * u(rng), w = 0.1 + 0.5 * u(rng), a = u(rng) - 0.5, k = 10.0 * u(rng);
      const double dt = 1.0 / 256.0;
      const auto f = WeightedSignal::sample_scalar(0.0, 12.0, dt, rho, [&](double t) {
        const double x = (t - c) / w;
        return (1.0 + a * std::sin(k * t)) * std::exp(-0.5 * x * x);
      });
      EXPECT_LE(weighted_norm(antiderivative(f)), weighted_norm(f) / rho * (1.0 + 10.0 * dt));
    }
  }
}

TEST(Antiderivative, Causal) {
  const auto f = WeightedSignal::sample_scalar(0.0, 6.0, 0.01, 1.0, [](double t) { return t < 2.0 ? 0.0 : std::sin(t); });
  const auto g = antiderivative(f);
  const double peak = g.samples().cwiseAbs().maxCoeff();
  for (Index i = 0; g.time(i) < 2.0 - 2.0 * g.dt(); ++i) EXPECT_LE(std::abs(g.samples()(i, 0)), 1e-8 * peak);
}

TEST(Antiderivative, Linear) {
  const auto f = pulse(1.0);
  const auto h = f.with_samples(f.samples().array().sin().matrix());
  const auto lhs = antiderivative(f.with_samples(2.0 * f.samples() - 3.0 * h.samples()));
  const Eigen::MatrixXd rhs = 2.0 * antiderivative(f).samples() - 3.0 * antiderivative(h).samples();
  EXPECT_LE((lhs.samples() - rhs).cwiseAbs().maxCoeff(), 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST(FourierLaplace, IdentityReproducesInput) {
  const auto f = pulse(1.0);
  const auto g = apply_symbol_fl(RationalMatrixFunction::constant(Eigen::MatrixXcd::Identity(1, 1)), f);
  EXPECT_LE((g.samples() - f.samples()).cwiseAbs().maxCoeff(), 1e-10 * f.samples().cwiseAbs().maxCoeff());
}

TEST(FourierLaplace, ConstantScales) {
  const auto f = pulse(1.0);
  const auto g = apply_symbol_fl(RationalMatrixFunction::scalar({0.25}, {1.0}), f);
  EXPECT_LE((g.samples() - 0.25 * f.samples()).cwiseAbs().maxCoeff(), 1e-10 * f.samples().cwiseAbs().maxCoeff());
}

TEST(FourierLaplace, SymbolZMatchesAntiderivative) {
  // the trapezoidal oracle carries O(dt^2) error, so compare on a fine grid
  const auto f = pulse(1.0, 1.0 / 4096.0);
  const auto g = apply_symbol_fl(RationalMatrixFunction::scalar({0.0, 1.0}, {1.0}), f);
  const auto h = antiderivative(f);
  // compare inside the window where the weighted values are still resolved
  double err = 0.0, peak = 0.0;
  for (Index i = 0; f.time(i) < 8.0; ++i) {
    err = std::max(err, std::abs(g.samples()(i, 0) - h.samples()(i, 0)));
    peak = std::max(peak, std::abs(h.samples()(i, 0)));
  }
  EXPECT_LE(err, 1e-6 * peak);
}

TEST(FourierLaplace, CausalUpToLeakage) {
  const auto f = pulse(1.0);
  const auto g = apply_symbol_fl(RationalMatrixFunction::scalar({1.0, 0.5}, {1.0, 2.0}), f);
  const double peak = g.samples().cwiseAbs().maxCoeff();
  for (Index i = 0; f.time(i) < 3.0 - 8.0 * 0.4; ++i) EXPECT_LE(std::abs(g.samples()(i, 0)), 1e-6 * peak);
}

TEST(FourierLaplace, WindowingError) {
  const auto f = WeightedSignal::sample_scalar(0.0, 2.0, 0.01, 1.0, [](double) { return 1.0; });
  EXPECT_THROW(apply_symbol_fl(RationalMatrixFunction::constant(Eigen::MatrixXcd::Identity(1, 1)), f), WindowingError);
}

TEST(FourierLaplace, PoleOnTheLine) {
  // d(z) = 1 - z vanishes at z = 1 = 1/(i*0 + rho) for rho = 1
  const auto f = pulse(1.0);
  EXPECT_THROW(apply_symbol_fl(RationalMatrixFunction::scalar({1.0}, {1.0, -1.0}), f), PoleProximity);
}
