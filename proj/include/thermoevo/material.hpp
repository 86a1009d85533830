#pragma once

/**
 * @file material.hpp
 * @brief Catalog of linear thermoelastic models written as one rational material law.
 *
 * Every model is expressed over the unknown block (v, sigma, Theta, q) as
 *
 *   M(z) = M0 + z M1(z),
 *
 *        | rho0  0              0                                     0          |
 *   M0 = | 0     C^-1           C^-1 Gamma                            0          |
 *        | 0     Gamma^* C^-1   nu + Gamma^* C^-1 Gamma + zeta0^* a0 zeta0   zeta0^* a0 |
 *        | 0     0              a0 zeta0                              a0         |
 *
 *   M1(z) = diag(0, 0, a1(z), a2(z)).
 *
 * The families differ only in the parameter map that produces a0, zeta0,
 * a1, a2 (and nu for Green-Lindsay) from their physical coefficients.
 */

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thermoevo/errors.hpp"
#include "thermoevo/rational.hpp"
#include "thermoevo/realization.hpp"
#include "thermoevo/signal.hpp"

namespace thermoevo {

enum class ModelFamily { Classical, LordShulman, GreenNaghdiI, GreenNaghdiII, GreenNaghdiIII, GreenLindsay, DPL_I, DPL_II, Custom };

inline constexpr std::array<ModelFamily, 8> catalog_families{
    ModelFamily::Classical,      ModelFamily::LordShulman,  ModelFamily::GreenNaghdiI, ModelFamily::GreenNaghdiII,
    ModelFamily::GreenNaghdiIII, ModelFamily::GreenLindsay, ModelFamily::DPL_I,        ModelFamily::DPL_II};

inline std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::Classical: return "Classical";
    case ModelFamily::LordShulman: return "LordShulman";
    case ModelFamily::GreenNaghdiI: return "GreenNaghdiI";
    case ModelFamily::GreenNaghdiII: return "GreenNaghdiII";
    case ModelFamily::GreenNaghdiIII: return "GreenNaghdiIII";
    case ModelFamily::GreenLindsay: return "GreenLindsay";
    case ModelFamily::DPL_I: return "DPL_I";
    case ModelFamily::DPL_II: return "DPL_II";
    case ModelFamily::Custom: return "Custom";
  }
  return "?";
}

inline ModelFamily family_from_string(std::string_view s) {
  for (auto f : catalog_families)
    if (to_string(f) == s) return f;
  if (s == "Custom") return ModelFamily::Custom;
  throw InvalidInput("unknown model family '" + std::string(s) + "'");
}

enum class Block { V = 0, Sigma = 1, Theta = 2, Q = 3 };

inline constexpr std::array<const char*, 4> block_names{"v", "sigma", "Theta", "q"};

/// Component counts of the four unknown blocks; (1,1,1,1) in one space dimension, (3,6,1,3) in three.
struct BlockShape {
  std::array<Index, 4> sizes{1, 1, 1, 1};

  Index size(Block b) const { return sizes[static_cast<std::size_t>(b)]; }
  Index offset(Block b) const {
    Index o = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(b); ++i) o += sizes[i];
    return o;
  }
  Index total() const { return sizes[0] + sizes[1] + sizes[2] + sizes[3]; }
  bool operator==(const BlockShape&) const = default;
};

enum class Classification { Generic, Degenerate };

inline std::string_view to_string(Classification c) { return c == Classification::Generic ? "Generic" : "Degenerate"; }

/**
 * @brief Pointwise material law of one cell.
 *
 * Holds the ingredients of M0 rather than M0 itself so that the congruence
 * structure L^* diag(rho0, C^-1, nu, a0) L stays available to the certifier.
 */
struct CellLaw {
  BlockShape shape;
  Eigen::MatrixXd rho0;   // v x v
  Eigen::MatrixXd c_inv;  // sigma x sigma
  Eigen::MatrixXd gamma;  // sigma x Theta
  Eigen::MatrixXd nu;     // Theta x Theta
  Eigen::MatrixXd a0;     // q x q
  Eigen::MatrixXd zeta0;  // q x Theta
  RationalMatrixFunction a1 = RationalMatrixFunction::zero(1, 1);
  RationalMatrixFunction a2 = RationalMatrixFunction::zero(1, 1);
  double n0 = 0.0;  // relaxation time in Theta = (1 + n0 d/dt) theta

  void validate_shapes() const {
    const auto chk = [](const Eigen::MatrixXd& m, Index r, Index c, const char* name) {
      if (m.rows() != r || m.cols() != c) throw InvalidInput(std::string("CellLaw: ") + name + " has the wrong shape");
      if (!m.allFinite()) throw InvalidInput(std::string("CellLaw: ") + name + " is not finite");
    };
    const Index nv = shape.size(Block::V), ns = shape.size(Block::Sigma), nt = shape.size(Block::Theta), nq = shape.size(Block::Q);
    chk(rho0, nv, nv, "rho0");
    chk(c_inv, ns, ns, "C^-1");
    chk(gamma, ns, nt, "Gamma");
    chk(nu, nt, nt, "nu");
    chk(a0, nq, nq, "a0");
    chk(zeta0, nq, nt, "zeta0");
    if (a1.rows() != nt || a1.cols() != nt) throw InvalidInput("CellLaw: a1 has the wrong shape");
    if (a2.rows() != nq || a2.cols() != nq) throw InvalidInput("CellLaw: a2 has the wrong shape");
  }

  /// M0 from the explicit block formula.
  Eigen::MatrixXd m0() const {
    const Index n = shape.total();
    const Index ov = shape.offset(Block::V), os = shape.offset(Block::Sigma), ot = shape.offset(Block::Theta), oq = shape.offset(Block::Q);
    const Index nv = shape.size(Block::V), ns = shape.size(Block::Sigma), nt = shape.size(Block::Theta), nq = shape.size(Block::Q);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m.block(ov, ov, nv, nv) = rho0;
    m.block(os, os, ns, ns) = c_inv;
    m.block(os, ot, ns, nt) = c_inv * gamma;
    m.block(ot, os, nt, ns) = gamma.transpose() * c_inv;
    m.block(ot, ot, nt, nt) = nu + gamma.transpose() * c_inv * gamma + zeta0.transpose() * a0 * zeta0;
    m.block(ot, oq, nt, nq) = zeta0.transpose() * a0;
    m.block(oq, ot, nq, nt) = a0 * zeta0;
    m.block(oq, oq, nq, nq) = a0;
    return m;
  }

  /// Unit upper-triangular factor with Gamma at (sigma, Theta) and zeta0 at (q, Theta).
  Eigen::MatrixXd congruence_factor() const {
    const Index n = shape.total();
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
    l.block(shape.offset(Block::Sigma), shape.offset(Block::Theta), shape.size(Block::Sigma), shape.size(Block::Theta)) = gamma;
    l.block(shape.offset(Block::Q), shape.offset(Block::Theta), shape.size(Block::Q), shape.size(Block::Theta)) = zeta0;
    return l;
  }

  /// diag(rho0, C^-1, nu, a0).
  Eigen::MatrixXd congruence_core() const {
    const Index n = shape.total();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    d.block(shape.offset(Block::V), shape.offset(Block::V), shape.size(Block::V), shape.size(Block::V)) = rho0;
    d.block(shape.offset(Block::Sigma), shape.offset(Block::Sigma), shape.size(Block::Sigma), shape.size(Block::Sigma)) = c_inv;
    d.block(shape.offset(Block::Theta), shape.offset(Block::Theta), shape.size(Block::Theta), shape.size(Block::Theta)) = nu;
    d.block(shape.offset(Block::Q), shape.offset(Block::Q), shape.size(Block::Q), shape.size(Block::Q)) = a0;
    return d;
  }

  /// M1(z) = diag(0, 0, a1, a2) over a common denominator.
  RationalMatrixFunction m1() const {
    const Index n = shape.total();
    const auto embed = [&](const RationalMatrixFunction& r, Block b) {
      std::vector<Eigen::MatrixXcd> num;
      for (const auto& c : r.numerator()) {
        Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(n, n);
        big.block(shape.offset(b), shape.offset(b), shape.size(b), shape.size(b)) = c;
        num.push_back(big);
      }
      return RationalMatrixFunction{num, r.denominator()};
    };
    return embed(a1, Block::Theta) + embed(a2, Block::Q);
  }

  /// M1(0), the derivative of M at the origin.
  Eigen::MatrixXcd m1_at_zero() const {
    const Index n = shape.total();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    m.block(shape.offset(Block::Theta), shape.offset(Block::Theta), shape.size(Block::Theta), shape.size(Block::Theta)) = a1.at_zero();
    m.block(shape.offset(Block::Q), shape.offset(Block::Q), shape.size(Block::Q), shape.size(Block::Q)) = a2.at_zero();
    return m;
  }

  /// Full symbol M(z) = M0 + z M1(z).
  Eigen::MatrixXcd symbol(cplx z) const {
    Eigen::MatrixXcd m = m0().cast<cplx>();
    m.block(shape.offset(Block::Theta), shape.offset(Block::Theta), shape.size(Block::Theta), shape.size(Block::Theta)) +=
        z * eval_rational(a1, z);
    m.block(shape.offset(Block::Q), shape.offset(Block::Q), shape.size(Block::Q), shape.size(Block::Q)) += z * eval_rational(a2, z);
    return m;
  }

  bool operator==(const CellLaw& o) const {
    return shape == o.shape && rho0 == o.rho0 && c_inv == o.c_inv && gamma == o.gamma && nu == o.nu && a0 == o.a0 &&
           zeta0 == o.zeta0 && a1 == o.a1 && a2 == o.a2 && n0 == o.n0;
  }
};

/**
 * @brief Named model family plus cellwise coefficients (one space dimension).
 *
 * Every coefficient is either a single value broadcast to all cells or one
 * value per cell. Custom laws take rho0, C, Gamma, nu, a0, zeta0 as
 * coefficients and a1, a2 as rational functions.
 */
struct ModelSpec {
  ModelFamily family = ModelFamily::Classical;
  Index n_cells = 1;
  std::map<std::string, std::vector<double>> coefficients;
  std::optional<RationalMatrixFunction> custom_a1;
  std::optional<RationalMatrixFunction> custom_a2;

  ModelSpec& set(const std::string& name, double value) {
    coefficients[name] = {value};
    return *this;
  }
  ModelSpec& set(const std::string& name, std::vector<double> values) {
    coefficients[name] = std::move(values);
    return *this;
  }

  bool has(const std::string& name) const { return coefficients.count(name) != 0; }

  double at(const std::string& name, Index cell) const {
    const auto it = coefficients.find(name);
    if (it == coefficients.end()) throw InvalidInput("missing coefficient '" + name + "'");
    if (it->second.size() == 1) return it->second.front();
    return it->second.at(static_cast<std::size_t>(cell));
  }

  void validate() const;
};

/// Coefficient names each family requires; anything else is rejected.
inline std::set<std::string> required_coefficients(ModelFamily f) {
  std::set<std::string> s{"rho0", "C", "Gamma"};
  switch (f) {
    case ModelFamily::Classical: s.insert({"nu", "kappa"}); break;
    case ModelFamily::LordShulman: s.insert({"nu", "kappa", "a0"}); break;
    case ModelFamily::GreenNaghdiI: s.insert({"nu", "k"}); break;
    case ModelFamily::GreenNaghdiII: s.insert({"nu", "k_star"}); break;
    case ModelFamily::GreenNaghdiIII: s.insert({"nu", "k", "k_star"}); break;
    case ModelFamily::GreenLindsay: s.insert({"kappa", "n0", "b", "d", "h"}); break;
    case ModelFamily::DPL_I:
    case ModelFamily::DPL_II: s.insert({"nu", "kappa", "n1", "n2"}); break;
    case ModelFamily::Custom: s.insert({"nu", "a0", "zeta0"}); break;
  }
  return s;
}

inline void ModelSpec::validate() const {
  if (n_cells < 1) throw InvalidInput("ModelSpec: n_cells must be positive");
  const auto required = required_coefficients(family);
  for (const auto& name : required)
    if (!has(name)) throw InvalidInput("ModelSpec: " + std::string(to_string(family)) + " requires coefficient '" + name + "'");
  for (const auto& [name, values] : coefficients) {
    if (!required.count(name)) {
      if (family == ModelFamily::GreenLindsay && name == "nu")
        throw InvalidInput("ModelSpec: GreenLindsay derives nu = h/n0; do not supply nu");
      throw InvalidInput("ModelSpec: coefficient '" + name + "' is not used by " + std::string(to_string(family)));
    }
    if (values.size() != 1 && values.size() != static_cast<std::size_t>(n_cells))
      throw InvalidInput("ModelSpec: coefficient '" + name + "' needs 1 or n_cells values");
    for (double v : values)
      if (!std::isfinite(v)) throw InvalidInput("ModelSpec: coefficient '" + name + "' is not finite");
  }
  if ((custom_a1 || custom_a2) && family != ModelFamily::Custom)
    throw InvalidInput("ModelSpec: a1/a2 rational functions are only accepted for Custom laws");

  for (Index c = 0; c < n_cells; ++c) {
    if (!(at("rho0", c) > 0.0)) throw InvalidInput("ModelSpec: rho0 must be positive");
    if (!(at("C", c) > 0.0)) throw InvalidInput("ModelSpec: C must be positive definite");
    if (has("nu") && !(at("nu", c) >= 0.0)) throw InvalidInput("ModelSpec: nu must be nonnegative");
    if (has("kappa") && at("kappa", c) == 0.0) throw InvalidInput("ModelSpec: kappa is not invertible");
    switch (family) {
      case ModelFamily::GreenNaghdiI:
      case ModelFamily::GreenNaghdiIII:
        if (at("k", c) == 0.0) throw InvalidInput("ModelSpec: k is not invertible");
        break;
      case ModelFamily::GreenNaghdiII:
        if (at("k_star", c) == 0.0) throw InvalidInput("ModelSpec: k_star is not invertible");
        break;
      case ModelFamily::GreenLindsay:
        if (!(at("n0", c) > 0.0)) throw InvalidInput("ModelSpec: GreenLindsay needs n0 > 0");
        break;
      case ModelFamily::DPL_I:
      case ModelFamily::DPL_II:
        if (at("n1", c) == 0.0 || at("n2", c) == 0.0) throw InvalidInput("ModelSpec: phase lags n1, n2 must be nonzero");
        break;
      default: break;
    }
  }
}

/// Assembled law: one CellLaw per cell plus its generic/degenerate class.
struct MaterialLaw {
  ModelFamily family = ModelFamily::Custom;
  std::vector<CellLaw> cells;
  Classification classification = Classification::Generic;

  Index n_cells() const { return static_cast<Index>(cells.size()); }
  const BlockShape& shape() const { return cells.front().shape; }

  bool is_spatially_constant() const {
    for (const auto& c : cells)
      if (!(c == cells.front())) return false;
    return true;
  }
};

namespace detail {

inline Eigen::MatrixXd scalar_matrix(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

}  // namespace detail

/**
 * @brief Smallest eigenvalue of M(0) = M0 relative to the largest, over all cells.
 *
 * Generic iff min eig > cutoff * max eig.
 */
inline Classification classify(const MaterialLaw& law, double cutoff = 1e-10) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& c : law.cells) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.m0(), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  return lo > cutoff * hi ? Classification::Generic : Classification::Degenerate;
}

/// Single-cell law from a validated spec.
inline CellLaw assemble_cell(const ModelSpec& spec, Index cell) {
  using detail::scalar_matrix;
  const auto at = [&](const char* n) { return spec.at(n, cell); };
  CellLaw law;
  law.rho0 = scalar_matrix(at("rho0"));
  law.c_inv = scalar_matrix(1.0 / at("C"));
  law.gamma = scalar_matrix(at("Gamma"));
  law.nu = scalar_matrix(0.0);
  law.a0 = scalar_matrix(0.0);
  law.zeta0 = scalar_matrix(0.0);
  law.a1 = RationalMatrixFunction::zero(1, 1);
  law.a2 = RationalMatrixFunction::zero(1, 1);
  if (spec.has("nu")) law.nu = scalar_matrix(at("nu"));

  switch (spec.family) {
    case ModelFamily::Classical:
      law.a2 = RationalMatrixFunction::scalar({1.0 / at("kappa")}, {1.0});
      break;
    case ModelFamily::LordShulman:
      law.a0 = scalar_matrix(at("a0"));
      law.a2 = RationalMatrixFunction::scalar({1.0 / at("kappa")}, {1.0});
      break;
    case ModelFamily::GreenNaghdiI:
      law.a2 = RationalMatrixFunction::scalar({1.0 / at("k")}, {1.0});
      break;
    case ModelFamily::GreenNaghdiII:
      law.a0 = scalar_matrix(1.0 / at("k_star"));
      break;
    case ModelFamily::GreenNaghdiIII:
      // (z k* + k)^{-1}
      law.a2 = RationalMatrixFunction::scalar({1.0}, {at("k"), at("k_star")});
      break;
    case ModelFamily::GreenLindsay: {
      const double kappa = at("kappa"), n0 = at("n0"), b = at("b"), d = at("d"), h = at("h");
      law.a0 = scalar_matrix(n0 / kappa);
      law.a2 = RationalMatrixFunction::scalar({1.0 / kappa}, {1.0});
      law.zeta0 = scalar_matrix(b / n0);
      law.n0 = n0;
      law.nu = scalar_matrix(h / n0);
      // (d - (h + b^* kappa^-1 b) n0^-1) (n0 + z)^{-1}
      law.a1 = RationalMatrixFunction::scalar({d - (h + b * b / kappa) / n0}, {n0, 1.0});
      break;
    }
    case ModelFamily::DPL_II: {
      const double kappa = at("kappa"), n1 = at("n1"), n2 = at("n2");
      law.a0 = scalar_matrix(0.5 * n1 * n1 / (n2 * kappa));
      // ((n1 + z) - n1^2/(2 n2)) (z + n2)^{-1} kappa^{-1}
      law.a2 = RationalMatrixFunction::scalar({(n1 - 0.5 * n1 * n1 / n2) / kappa, 1.0 / kappa}, {n2, 1.0});
      break;
    }
    case ModelFamily::DPL_I: {
      const double kappa = at("kappa"), n1 = at("n1"), n2 = at("n2");
      // (z + n2)^{-1} (z + n1) kappa^{-1}
      law.a2 = RationalMatrixFunction::scalar({n1 / kappa, 1.0 / kappa}, {n2, 1.0});
      break;
    }
    case ModelFamily::Custom:
      law.a0 = scalar_matrix(at("a0"));
      law.zeta0 = scalar_matrix(at("zeta0"));
      if (spec.custom_a1) law.a1 = *spec.custom_a1;
      if (spec.custom_a2) law.a2 = *spec.custom_a2;
      break;
  }
  law.validate_shapes();
  return law;
}

/// Representative coefficients for each catalog family, chosen so that every structurally possible block is nonzero.
inline ModelSpec catalog_example(ModelFamily f, Index n_cells = 1) {
  ModelSpec s;
  s.family = f;
  s.n_cells = n_cells;
  s.set("rho0", 1.0).set("C", 1.0).set("Gamma", 0.5);
  if (f != ModelFamily::GreenLindsay) s.set("nu", 1.0);
  switch (f) {
    case ModelFamily::Classical: s.set("kappa", 1.0); break;
    case ModelFamily::LordShulman: s.set("kappa", 1.0).set("a0", 1.0); break;
    case ModelFamily::GreenNaghdiI: s.set("k", 1.0); break;
    case ModelFamily::GreenNaghdiII: s.set("k_star", 1.0); break;
    case ModelFamily::GreenNaghdiIII: s.set("k", 1.0).set("k_star", 1.0); break;
    case ModelFamily::GreenLindsay: s.set("kappa", 1.0).set("n0", 1.0).set("b", 0.5).set("d", 2.0).set("h", 1.0); break;
    case ModelFamily::DPL_I:
    case ModelFamily::DPL_II: s.set("kappa", 1.0).set("n1", 0.5).set("n2", 1.0); break;
    case ModelFamily::Custom: s.set("a0", 1.0).set("zeta0", 0.0); break;
  }
  return s;
}

/// Builds (M0, M1) cellwise for the spec's family.
inline MaterialLaw assemble_material_law(const ModelSpec& spec) {
  spec.validate();
  MaterialLaw law;
  law.family = spec.family;
  law.cells.reserve(static_cast<std::size_t>(spec.n_cells));
  for (Index c = 0; c < spec.n_cells; ++c) law.cells.push_back(assemble_cell(spec, c));
  law.classification = classify(law);
  return law;
}

/// Law from explicitly given cell laws (general block shapes).
inline MaterialLaw make_custom_law(std::vector<CellLaw> cells) {
  if (cells.empty()) throw InvalidInput("make_custom_law: no cells");
  for (const auto& c : cells) {
    c.validate_shapes();
    if (!(c.shape == cells.front().shape)) throw InvalidInput("make_custom_law: cells differ in block shape");
  }
  MaterialLaw law;
  law.family = ModelFamily::Custom;
  law.cells = std::move(cells);
  law.classification = classify(law);
  return law;
}

struct ZeroPattern {
  std::array<std::array<bool, 4>, 4> m0{};
  std::array<std::array<bool, 4>, 4> m1{};
  bool operator==(const ZeroPattern&) const = default;
};

/// Block (i, j) is marked iff it is not identically zero in some cell.
inline ZeroPattern zero_pattern(const MaterialLaw& law) {
  ZeroPattern p;
  for (const auto& c : law.cells) {
    const Eigen::MatrixXd m0 = c.m0();
    const Eigen::MatrixXcd m1 = c.m1_at_zero();
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const Block bi = static_cast<Block>(i), bj = static_cast<Block>(j);
        const auto r = c.shape.offset(bi), cc = c.shape.offset(bj);
        const auto nr = c.shape.size(bi), nc = c.shape.size(bj);
        if (m0.block(r, cc, nr, nc).cwiseAbs().maxCoeff() > 0.0) p.m0[i][j] = true;
        if (m1.block(r, cc, nr, nc).cwiseAbs().maxCoeff() > 0.0) p.m1[i][j] = true;
      }
  }
  return p;
}

/// Text table with rows/columns v, sigma, Theta, q and entries '*' or '0'.
inline std::string pattern_table(const std::array<std::array<bool, 4>, 4>& p) {
  const auto cell = [](std::string text) {
    text.resize(7, ' ');
    return text;
  };
  const auto trimmed = [](std::string line) {
    line.erase(line.find_last_not_of(' ') + 1);
    return line + '\n';
  };
  std::string header = cell("");
  for (const char* name : block_names) header += cell(name);
  std::string out = trimmed(header);
  for (std::size_t i = 0; i < 4; ++i) {
    std::string row = cell(block_names[i]);
    for (std::size_t j = 0; j < 4; ++j) row += cell(p[i][j] ? "*" : "0");
    out += trimmed(row);
  }
  return out;
}

inline std::string pattern_report(const MaterialLaw& law) {
  const ZeroPattern p = zero_pattern(law);
  std::ostringstream os;
  os << "model: " << to_string(law.family) << '\n';
  os << "classification: " << to_string(law.classification) << '\n';
  os << "M(0):\n" << pattern_table(p.m0);
  os << "M1(0):\n" << pattern_table(p.m1);
  return os.str();
}

/**
 * @brief Causal solution theta of n0 theta' + theta = Theta from zero initial data.
 *
 * Theta is interpolated linearly between samples and every step is integrated
 * exactly. n0 = 0 returns Theta unchanged.
 */
inline WeightedSignal recover_theta(const WeightedSignal& big_theta, double n0) {
  require_finite(big_theta, "recover_theta");
  if (!(n0 >= 0.0) || !std::isfinite(n0)) throw InvalidInput("recover_theta: n0 must be nonnegative");
  if (n0 == 0.0) return big_theta;
  // theta' = -theta/n0 + Theta/n0
  const double lambda = -1.0 / n0;
  cplx decay, phi1, phi2;
  exponential_weights(cplx{lambda}, big_theta.dt(), decay, phi1, phi2);
  const double e = decay.real(), w1 = phi1.real() / n0, w2 = phi2.real() / n0;
  const Eigen::MatrixXd& u = big_theta.samples();
  Eigen::MatrixXd out(u.rows(), u.cols());
  out.row(0).setZero();
  for (Index k = 1; k < u.rows(); ++k) out.row(k) = e * out.row(k - 1) + w1 * u.row(k - 1) + w2 * (u.row(k) - u.row(k - 1));
  return big_theta.with_samples(std::move(out));
}

}  // namespace thermoevo
