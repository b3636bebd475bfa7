#pragma once

// Dense matrix and monomial operators shared by the model-based and
// data-driven solvers.
//
// Half-vectorization convention: for symmetric P and a vector x,
//
//   vech_scaled(P) = [p11, 2 p12, ..., 2 p1n, p22, 2 p23, ..., pnn]
//   bar(x)         = [x1^2, x1 x2, ..., x1 xn, x2^2, x2 x3, ..., xn^2]
//
// so that x' P x = bar(x)' vech_scaled(P). Both maps walk the upper
// triangle row by row through triangle_pairs(); nothing else encodes the
// ordering.

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace slq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A square matrix that is exactly symmetric. Construction symmetrizes
/// its argument as (M + M') / 2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Eigen::Index n) : m_(Matrix::Zero(n, n)) {}
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index n);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  operator const Matrix&() const noexcept { return m_; }

  double min_eigenvalue() const;
  double max_abs_eigenvalue() const;

 private:
  Matrix m_;
};

/// n(n+1)/2.
constexpr Eigen::Index tri_size(Eigen::Index n) { return n * (n + 1) / 2; }

/// Inverse of tri_size; throws DimensionError when `len` is not a
/// triangular number.
Eigen::Index tri_dim(Eigen::Index len);

/// (i, j), i <= j, in row-scan order of the upper triangle.
std::vector<std::pair<Eigen::Index, Eigen::Index>> triangle_pairs(
    Eigen::Index n);

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking vectorization.
Vector vecm(const Matrix& a);

/// Inverse of vecm for a rows x cols target.
Matrix unvecm(const Vector& v, Eigen::Index rows, Eigen::Index cols);

Vector vech_scaled(const SymMatrix& p);
SymMatrix unvech_scaled(const Vector& v);

/// Quadratic monomials x_i x_j, i <= j, in vech_scaled order.
Vector bar(const Vector& x);

/// The zero-one map L with bar(y) = L (y kron y).
Matrix monomial_selector(Eigen::Index n);

/// Number of singular values above tol * sigma_max. Zero for an all-zero
/// or empty matrix.
int numeric_rank(const Matrix& m, double tol = 1e-8);

/// Frobenius norm of (a - b).
double frobenius_distance(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

}  // namespace slq
