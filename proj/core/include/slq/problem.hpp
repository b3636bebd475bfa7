#pragma once

// Problem instance for the stochastic LQ regulator
//
//   dX = (A X + B v) ds + (C X + D v) dW,   X(0) = x0,
//   J(v) = E int_0^inf  X'QX + 2 v'SX + v'Rv  ds
//
// with a scalar Brownian motion W, plus the mean-square stability test
// used to certify feedback gains v = K X.

#include <optional>
#include <string>

#include "slq/cost.hpp"
#include "slq/matops.hpp"

namespace slq {

struct SystemModel {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix C;  // n x n
  Matrix D;  // n x m

  Eigen::Index n() const noexcept { return A.rows(); }
  Eigen::Index m() const noexcept { return B.cols(); }

  /// Throws DimensionError on inconsistent shapes and ValidationError on
  /// non-finite entries.
  void check() const;
};

struct ProblemSpec {
  SystemModel model;
  CostSpec cost;
  Vector x0;
  Gain K0;
};

/// Closed-loop drift and diffusion (A + B K, C + D K).
struct ClosedLoop {
  Matrix A_K;
  Matrix C_K;
};

ClosedLoop closed_loop(const SystemModel& model, const Gain& K);

/// The n^2 x n^2 second-moment generator
///   I kron A_K' + A_K' kron I + C_K' kron C_K'
/// acting on vec of the Lyapunov variable.
Matrix ms_generator(const Matrix& A_K, const Matrix& C_K);

/// Largest real part over the eigenvalues of ms_generator(A + BK, C + DK).
/// Negative iff v = K X is mean-square stabilizing.
double ms_spectral_abscissa(const SystemModel& model, const Gain& K);

bool is_ms_stabilizer(const SystemModel& model, const Gain& K,
                      double margin = 0.0);

/// Full load-time validation: shapes, cost definiteness, x0 size and the
/// stabilizing property of K0. Throws ValidationError / DimensionError.
void validate_problem(const ProblemSpec& spec);

}  // namespace slq
