#pragma once

#include <optional>
#include <string>

#include "slq/matops.hpp"

namespace slq {

/// State feedback gain K (m x n) of the policy v = K X.
using Gain = Matrix;

/// Quadratic cost weights. R and Q - S' R^{-1} S must be positive definite.
struct CostSpec {
  SymMatrix Q;  // n x n
  Matrix S;     // m x n
  SymMatrix R;  // m x m
};

/// Relative floor used for every strict definiteness test:
/// lambda_min > kDefinitenessTol * (1 + max |lambda|).
inline constexpr double kDefinitenessTol = 1e-10;

bool is_positive_definite(const SymMatrix& m, double rel_tol = kDefinitenessTol);

struct CostViolation {
  enum class Kind { RNotPositiveDefinite, SchurComplementNotPositiveDefinite };
  Kind kind;
  std::string matrix;  // "R" or "Q - S' R^-1 S"
  double min_eigenvalue;

  std::string message() const;
};

/// Empty when both definiteness conditions hold. Throws DimensionError on
/// inconsistent shapes.
std::optional<CostViolation> validate_cost(const CostSpec& cost);

}  // namespace slq
