#pragma once

// Model-based policy iteration for the stochastic algebraic Riccati
// equation. Each step evaluates the current gain K_i by solving
//
//   A_i' P + P A_i + C_i' P C_i + Q_i = 0,
//   A_i = A + B K_i,  C_i = C + D K_i,  Q_i = S'K_i + K_i'RK_i + K_i'S + Q,
//
// and improves it with
//
//   K_{i+1} = -(R + D'P D)^{-1} (B'P + D'P C + S).
//
// This is the ground truth the data-driven solver is validated against.

#include <vector>

#include "slq/problem.hpp"

namespace slq {

/// Solves A'P + PA + C'PC + Q = 0 through its Kronecker linearization and
/// returns the symmetrized solution. Throws SingularGeneratorError when
/// the operator is (numerically) singular.
SymMatrix solve_glyap(const Matrix& A, const Matrix& C, const SymMatrix& Q);

/// Q_i = S'K + K'RK + K'S + Q.
SymMatrix policy_cost(const CostSpec& cost, const Gain& K);

Gain gain_update(const SystemModel& model, const CostSpec& cost,
                 const SymMatrix& P);

/// P A_K + A_K'P + C_K'P C_K + K'RK + S'K + K'S + Q. Zero exactly when P
/// evaluates K, and at the Riccati solution when K = gain_update(P).
SymMatrix sare_residual(const SystemModel& model, const CostSpec& cost,
                        const SymMatrix& P, const Gain& K);

/// PA + A'P + C'PC + Q - (C'PD + PB + S')(R + D'PD)^{-1}(D'PC + B'P + S).
SymMatrix sare_residual_closed(const SystemModel& model, const CostSpec& cost,
                               const SymMatrix& P);

struct OracleIteration {
  int index;             // i, producing (P_{i+1}, K_{i+1}) from K_i
  double dP_frobenius;   // |P_i - P_{i+1}|_F, with P_0 = 0
  double residual_frobenius;  // |sare_residual_closed(P_{i+1})|_F
  SymMatrix P;           // P_{i+1}
  Gain K;                // K_{i+1}
};

struct OracleReport {
  SymMatrix P_star;
  Gain K_star;
  int iterations = 0;
  bool converged = false;
  std::vector<OracleIteration> history;
};

struct OracleOptions {
  double eps = 1e-10;
  int max_iter = 100;
};

/// Kleinman-style policy iteration from spec.K0. Throws
/// NotConvergedError<OracleReport> when max_iter is reached and
/// SingularGeneratorError (tagged with the iteration) if an iterate stops
/// being stabilizing.
OracleReport policy_iteration(const ProblemSpec& spec,
                              const OracleOptions& opts = {});

}  // namespace slq
