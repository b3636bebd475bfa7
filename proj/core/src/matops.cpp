#include "slq/matops.hpp"

#include <cmath>
#include <string>

#include "slq/errors.hpp"

namespace slq {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("SymMatrix: expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return SymMatrix(Matrix::Identity(n, n));
}

double SymMatrix::min_eigenvalue() const {
  if (dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double SymMatrix::max_abs_eigenvalue() const {
  if (dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::Index tri_dim(Eigen::Index len) {
  // n = (sqrt(8 len + 1) - 1) / 2, checked exactly in integers.
  const auto guess = static_cast<Eigen::Index>(
      std::llround((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0));
  for (Eigen::Index n = std::max<Eigen::Index>(0, guess - 1); n <= guess + 1;
       ++n) {
    if (tri_size(n) == len) return n;
  }
  throw DimensionError("length " + std::to_string(len) +
                       " is not a triangular number n(n+1)/2");
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> triangle_pairs(
    Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(tri_size(n)));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const Eigen::Index p = a.rows(), q = a.cols(), r = b.rows(), s = b.cols();
  Matrix out(p * r, q * s);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      out.block(i * r, j * s, r, s) = a(i, j) * b;
    }
  }
  return out;
}

Vector vecm(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvecm(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw DimensionError("unvecm: length " + std::to_string(v.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector vech_scaled(const SymMatrix& p) {
  const auto pairs = triangle_pairs(p.dim());
  Vector v(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    v(static_cast<Eigen::Index>(k)) = (i == j) ? p(i, j) : 2.0 * p(i, j);
  }
  return v;
}

SymMatrix unvech_scaled(const Vector& v) {
  const Eigen::Index n = tri_dim(v.size());
  Matrix m(n, n);
  const auto pairs = triangle_pairs(n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const double x = v(static_cast<Eigen::Index>(k));
    if (i == j) {
      m(i, i) = x;
    } else {
      m(i, j) = m(j, i) = 0.5 * x;
    }
  }
  return SymMatrix(m);
}

Vector bar(const Vector& x) {
  const auto pairs = triangle_pairs(x.size());
  Vector v(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    v(static_cast<Eigen::Index>(k)) = x(i) * x(j);
  }
  return v;
}

Matrix monomial_selector(Eigen::Index n) {
  const auto pairs = triangle_pairs(n);
  Matrix sel = Matrix::Zero(static_cast<Eigen::Index>(pairs.size()), n * n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    // (i, j) entry of y y' in column-major order.
    sel(static_cast<Eigen::Index>(k), i + j * n) = 1.0;
  }
  return sel;
}

int numeric_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = tol * sv(0);
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) ++rank;
  }
  return rank;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  return (a - b).norm();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace slq
