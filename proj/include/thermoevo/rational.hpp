#pragma once

/**
 * @file rational.hpp
 * @brief Matrix-valued rational functions R(z) = N(z) / d(z) of z = (time derivative)^{-1}.
 *
 * The numerator is a polynomial with matrix coefficients, the denominator a
 * scalar polynomial. Both are stored with ascending powers of z. The
 * denominator is normalized to d(0) = 1 on construction, which makes the
 * representation canonical; construction fails if d(0) = 0 because material
 * laws must be analytic at the origin.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "thermoevo/errors.hpp"

namespace thermoevo {

using cplx = std::complex<double>;
using Index = Eigen::Index;

class RationalMatrixFunction {
 public:
  RationalMatrixFunction(std::vector<Eigen::MatrixXcd> numerator, std::vector<cplx> denominator)
      : num_{std::move(numerator)}, den_{std::move(denominator)} {
    if (num_.empty()) throw InvalidInput("rational function: empty numerator");
    if (den_.empty()) throw InvalidInput("rational function: empty denominator");
    const Index r = num_.front().rows();
    const Index c = num_.front().cols();
    if (r == 0 || c == 0) throw InvalidInput("rational function: empty coefficient matrix");
    for (const auto& m : num_) {
      if (m.rows() != r || m.cols() != c) throw InvalidInput("rational function: numerator coefficients differ in shape");
      if (!m.allFinite()) throw InvalidInput("rational function: non-finite numerator coefficient");
    }
    for (const auto& d : den_) {
      if (!std::isfinite(d.real()) || !std::isfinite(d.imag()))
        throw InvalidInput("rational function: non-finite denominator coefficient");
    }
    if (den_.front() == cplx{0.0, 0.0})
      throw InvalidInput("rational function: denominator vanishes at z = 0 (not analytic at 0)");
    const cplx d0 = den_.front();
    for (auto& d : den_) d /= d0;
    for (auto& m : num_) m /= d0;
    trim();
  }

  static RationalMatrixFunction constant(const Eigen::MatrixXcd& m) { return {{m}, {cplx{1.0}}}; }

  static RationalMatrixFunction zero(Index rows, Index cols) {
    return constant(Eigen::MatrixXcd::Zero(rows, cols));
  }

  /// Scalar (1x1) rational function from ascending real coefficients.
  static RationalMatrixFunction scalar(const std::vector<double>& num, const std::vector<double>& den) {
    std::vector<Eigen::MatrixXcd> n;
    for (double c : num) n.push_back(Eigen::MatrixXcd::Constant(1, 1, cplx{c}));
    std::vector<cplx> d(den.begin(), den.end());
    return {std::move(n), std::move(d)};
  }

  /// Product form prod_k Q_k(z)^{-1} P_k(z), left to right, normalized to a single ratio.
  static RationalMatrixFunction from_factors(const std::vector<std::pair<std::vector<Eigen::MatrixXcd>, std::vector<cplx>>>& factors) {
    if (factors.empty()) throw InvalidInput("rational function: no factors");
    RationalMatrixFunction acc{factors.front().first, factors.front().second};
    for (std::size_t k = 1; k < factors.size(); ++k) acc = acc * RationalMatrixFunction{factors[k].first, factors[k].second};
    return acc;
  }

  Index rows() const { return num_.front().rows(); }
  Index cols() const { return num_.front().cols(); }
  const std::vector<Eigen::MatrixXcd>& numerator() const { return num_; }
  const std::vector<cplx>& denominator() const { return den_; }
  Index numerator_degree() const { return static_cast<Index>(num_.size()) - 1; }
  Index denominator_degree() const { return static_cast<Index>(den_.size()) - 1; }

  bool is_zero() const { return num_.size() == 1 && num_.front().isZero(0.0); }
  bool is_constant() const { return num_.size() == 1 && den_.size() == 1; }

  /// Value at the origin, N(0) since d(0) = 1.
  Eigen::MatrixXcd at_zero() const { return num_.front(); }

  cplx denominator_at(cplx z) const {
    cplx acc{0.0};
    for (auto it = den_.rbegin(); it != den_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  Eigen::MatrixXcd numerator_at(cplx z) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows(), cols());
    for (auto it = num_.rbegin(); it != num_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  double max_denominator_coefficient() const {
    double m = 0.0;
    for (const auto& d : den_) m = std::max(m, std::abs(d));
    return m;
  }

  friend RationalMatrixFunction operator*(const RationalMatrixFunction& a, const RationalMatrixFunction& b) {
    if (a.cols() != b.rows()) throw InvalidInput("rational function product: shape mismatch");
    std::vector<Eigen::MatrixXcd> n(a.num_.size() + b.num_.size() - 1, Eigen::MatrixXcd::Zero(a.rows(), b.cols()));
    for (std::size_t i = 0; i < a.num_.size(); ++i)
      for (std::size_t j = 0; j < b.num_.size(); ++j) n[i + j] += a.num_[i] * b.num_[j];
    return {std::move(n), poly_mul(a.den_, b.den_)};
  }

  friend RationalMatrixFunction operator+(const RationalMatrixFunction& a, const RationalMatrixFunction& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("rational function sum: shape mismatch");
    if (a.den_ == b.den_) {
      std::vector<Eigen::MatrixXcd> n(std::max(a.num_.size(), b.num_.size()), Eigen::MatrixXcd::Zero(a.rows(), a.cols()));
      for (std::size_t i = 0; i < a.num_.size(); ++i) n[i] += a.num_[i];
      for (std::size_t i = 0; i < b.num_.size(); ++i) n[i] += b.num_[i];
      return {std::move(n), a.den_};
    }
    std::vector<Eigen::MatrixXcd> n(std::max(a.num_.size() + b.den_.size(), b.num_.size() + a.den_.size()) - 1,
                                    Eigen::MatrixXcd::Zero(a.rows(), a.cols()));
    for (std::size_t i = 0; i < a.num_.size(); ++i)
      for (std::size_t j = 0; j < b.den_.size(); ++j) n[i + j] += a.num_[i] * b.den_[j];
    for (std::size_t i = 0; i < b.num_.size(); ++i)
      for (std::size_t j = 0; j < a.den_.size(); ++j) n[i + j] += b.num_[i] * a.den_[j];
    return {std::move(n), poly_mul(a.den_, b.den_)};
  }

  friend RationalMatrixFunction operator*(cplx s, const RationalMatrixFunction& a) {
    auto n = a.num_;
    for (auto& m : n) m *= s;
    return {std::move(n), a.den_};
  }

  /// Multiplies by z (shifts numerator coefficients up one degree).
  RationalMatrixFunction times_z() const {
    std::vector<Eigen::MatrixXcd> n;
    n.reserve(num_.size() + 1);
    n.push_back(Eigen::MatrixXcd::Zero(rows(), cols()));
    n.insert(n.end(), num_.begin(), num_.end());
    return {std::move(n), den_};
  }

  bool operator==(const RationalMatrixFunction& o) const {
    if (num_.size() != o.num_.size() || den_ != o.den_) return false;
    for (std::size_t i = 0; i < num_.size(); ++i)
      if (num_[i].rows() != o.num_[i].rows() || num_[i].cols() != o.num_[i].cols() || num_[i] != o.num_[i]) return false;
    return true;
  }

 private:
  static std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> r(a.size() + b.size() - 1, cplx{0.0});
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
  }

  void trim() {
    while (num_.size() > 1 && num_.back().isZero(0.0)) num_.pop_back();
    while (den_.size() > 1 && den_.back() == cplx{0.0, 0.0}) den_.pop_back();
  }

  std::vector<Eigen::MatrixXcd> num_;
  std::vector<cplx> den_;
};

/// Horner evaluation of N(z)/d(z). Throws PoleProximity when |d(z)| is at round-off level.
inline Eigen::MatrixXcd eval_rational(const RationalMatrixFunction& r, cplx z) {
  const cplx d = r.denominator_at(z);
  if (!(std::abs(d) > 1e-14 * r.max_denominator_coefficient()))
    throw PoleProximity("eval_rational: z is at a pole of the denominator");
  return r.numerator_at(z) / d;
}

/// Hermitian part (A + A^*)/2.
inline Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace thermoevo
