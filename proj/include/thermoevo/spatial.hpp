#pragma once

/**
 * @file spatial.hpp
 * @brief Staggered 1-D discretization of the skew-selfadjoint spatial operator.
 *
 * On (0, L) with n cells of width h the displacement velocity v and the
 * temperature Theta live at the n - 1 interior vertices x_j = j h (the
 * boundary vertices carry the homogeneous Dirichlet values and are not
 * unknowns), while the stress sigma and the heat flux q live at the n cell
 * midpoints x_{j+1/2}. With the forward difference D_grad (vertex -> midpoint)
 * and D_div = -D_grad^T the operator over (v, sigma, Theta, q) is
 *
 *         |  0       -D_div   0       0     |
 *   A_h = | -D_grad   0       0       0     |
 *         |  0        0       0       D_div |
 *         |  0        0       D_grad  0     |
 *
 * which is antisymmetric by construction.
 */

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <vector>

#include "thermoevo/errors.hpp"
#include "thermoevo/signal.hpp"

namespace thermoevo {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

struct Grid1D {
  double length = 1.0;
  Index n_cells = 2;

  Grid1D() = default;
  Grid1D(double l, Index n) : length{l}, n_cells{n} { validate(); }

  void validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw InvalidInput("Grid1D: length must be positive");
    if (n_cells < 2) throw InvalidInput("Grid1D: need at least two cells");
  }

  double h() const { return length / static_cast<double>(n_cells); }
  Index n_nodes() const { return n_cells - 1; }
  Index n_faces() const { return n_cells; }

  /// Position of interior vertex @p j (0-based, j < n_nodes).
  double node(Index j) const { return static_cast<double>(j + 1) * h(); }
  /// Midpoint of cell @p i.
  double face(Index i) const { return (static_cast<double>(i) + 0.5) * h(); }

  Eigen::VectorXd node_positions() const {
    Eigen::VectorXd x(n_nodes());
    for (Index j = 0; j < n_nodes(); ++j) x(j) = node(j);
    return x;
  }
  Eigen::VectorXd face_positions() const {
    Eigen::VectorXd x(n_faces());
    for (Index i = 0; i < n_faces(); ++i) x(i) = face(i);
    return x;
  }
};

/// Offsets of the four unknown blocks (v, sigma, Theta, q) in the stacked state vector.
struct StaggeredLayout {
  Index n_nodes = 0;
  Index n_faces = 0;

  explicit StaggeredLayout(const Grid1D& g) : n_nodes{g.n_nodes()}, n_faces{g.n_faces()} {}
  StaggeredLayout() = default;

  Index v() const { return 0; }
  Index sigma() const { return n_nodes; }
  Index theta() const { return n_nodes + n_faces; }
  Index q() const { return 2 * n_nodes + n_faces; }
  Index total() const { return 2 * (n_nodes + n_faces); }

  Index offset(int block) const {
    switch (block) {
      case 0: return v();
      case 1: return sigma();
      case 2: return theta();
      default: return q();
    }
  }
  Index size(int block) const { return block % 2 == 0 ? n_nodes : n_faces; }
};

struct DiscreteSpatialOperator {
  Grid1D grid;
  SparseMatrix d_grad;  // n_faces x n_nodes
  SparseMatrix d_div;   // n_nodes x n_faces, equal to -d_grad^T
  SparseMatrix a;       // full block operator

  StaggeredLayout layout() const { return StaggeredLayout(grid); }
};

/// Forward difference (u_{j+1} - u_j)/h from vertices to midpoints with zero boundary values.
inline SparseMatrix difference_matrix(const Grid1D& grid) {
  grid.validate();
  const double inv_h = 1.0 / grid.h();
  std::vector<Triplet> t;
  for (Index i = 0; i < grid.n_faces(); ++i) {
    // midpoint i sits between vertex i (column i - 1) and vertex i + 1 (column i)
    if (i >= 1) t.emplace_back(static_cast<int>(i), static_cast<int>(i - 1), -inv_h);
    if (i < grid.n_nodes()) t.emplace_back(static_cast<int>(i), static_cast<int>(i), inv_h);
  }
  SparseMatrix d(grid.n_faces(), grid.n_nodes());
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

/// Vertex-to-midpoint average (u_j + u_{j+1})/2 with zero boundary values.
inline SparseMatrix averaging_matrix(const Grid1D& grid) {
  grid.validate();
  std::vector<Triplet> t;
  for (Index i = 0; i < grid.n_faces(); ++i) {
    if (i >= 1) t.emplace_back(static_cast<int>(i), static_cast<int>(i - 1), 0.5);
    if (i < grid.n_nodes()) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 0.5);
  }
  SparseMatrix p(grid.n_faces(), grid.n_nodes());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

inline DiscreteSpatialOperator build_operators(const Grid1D& grid) {
  grid.validate();
  DiscreteSpatialOperator op;
  op.grid = grid;
  op.d_grad = difference_matrix(grid);
  op.d_div = -SparseMatrix(op.d_grad.transpose());

  const StaggeredLayout lay(grid);
  std::vector<Triplet> t;
  for (int k = 0; k < op.d_grad.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(op.d_grad, k); it; ++it) {
      const int face = static_cast<int>(it.row()), node = static_cast<int>(it.col());
      const double g = it.value();
      // (v, sigma) = -D_div = D_grad^T, (sigma, v) = -D_grad
      t.emplace_back(static_cast<int>(lay.v()) + node, static_cast<int>(lay.sigma()) + face, g);
      t.emplace_back(static_cast<int>(lay.sigma()) + face, static_cast<int>(lay.v()) + node, -g);
      // (Theta, q) = D_div = -D_grad^T, (q, Theta) = D_grad
      t.emplace_back(static_cast<int>(lay.theta()) + node, static_cast<int>(lay.q()) + face, -g);
      t.emplace_back(static_cast<int>(lay.q()) + face, static_cast<int>(lay.theta()) + node, g);
    }
  }
  op.a.resize(lay.total(), lay.total());
  op.a.setFromTriplets(t.begin(), t.end());
  return op;
}

/// Largest singular value by power iteration on A^T A.
inline double operator_norm(const SparseMatrix& a, int iterations = 200) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(a.cols());
  if (x.size() > 1) x(0) = 2.0;
  double sigma = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const Eigen::VectorXd y = a.transpose() * (a * x);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    sigma = std::sqrt(ny / x.norm());
    x = y / ny;
  }
  return sigma;
}

/// max over random pairs of |<A u, w> + <u, A w>| / (|u| |w| |A|).
inline double verify_skew_adjoint(const SparseMatrix& a, int pairs = 100, unsigned seed = 12345) {
  if (a.rows() != a.cols()) throw InvalidInput("verify_skew_adjoint: operator must be square");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const double norm = operator_norm(a);
  if (norm == 0.0) return 0.0;
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(a.cols(), [&] { return g(rng); });
    const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(a.cols(), [&] { return g(rng); });
    const double r = std::abs((a * u).dot(w) + u.dot(a * w)) / (u.norm() * w.norm() * norm);
    worst = std::max(worst, r);
  }
  return worst;
}

/// Coordinate export, one `row col value` line per stored entry.
inline void write_coo(std::ostream& os, const SparseMatrix& m) {
  os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

/// Orthonormal vertex mode k = 1..n-1: sqrt(2/n) sin(k pi j / n).
inline Eigen::VectorXd node_mode(const Grid1D& g, Index k) {
  const double n = static_cast<double>(g.n_cells);
  Eigen::VectorXd v(g.n_nodes());
  for (Index j = 0; j < g.n_nodes(); ++j) v(j) = std::sqrt(2.0 / n) * std::sin(static_cast<double>(k) * std::numbers::pi * static_cast<double>(j + 1) / n);
  return v;
}

/// Orthonormal midpoint mode k = 0..n-1: sqrt(2/n) cos(k pi (i + 1/2) / n), and 1/sqrt(n) for k = 0.
inline Eigen::VectorXd face_mode(const Grid1D& g, Index k) {
  const double n = static_cast<double>(g.n_cells);
  Eigen::VectorXd u(g.n_faces());
  for (Index i = 0; i < g.n_faces(); ++i)
    u(i) = k == 0 ? 1.0 / std::sqrt(n) : std::sqrt(2.0 / n) * std::cos(static_cast<double>(k) * std::numbers::pi * (static_cast<double>(i) + 0.5) / n);
  return u;
}

/// Singular value pairing node mode k with face mode k: D_grad V_k = s_k U_k.
inline double mode_wavenumber(const Grid1D& g, Index k) {
  return 2.0 / g.h() * std::sin(static_cast<double>(k) * std::numbers::pi / (2.0 * static_cast<double>(g.n_cells)));
}

/// Columns are the vertex modes k = 1..n-1.
inline Eigen::MatrixXd node_mode_basis(const Grid1D& g) {
  Eigen::MatrixXd q(g.n_nodes(), g.n_nodes());
  for (Index k = 1; k <= g.n_nodes(); ++k) q.col(k - 1) = node_mode(g, k);
  return q;
}

/// Columns are the midpoint modes k = 0..n-1.
inline Eigen::MatrixXd face_mode_basis(const Grid1D& g) {
  Eigen::MatrixXd q(g.n_faces(), g.n_faces());
  for (Index k = 0; k < g.n_faces(); ++k) q.col(k) = face_mode(g, k);
  return q;
}

}  // namespace thermoevo
