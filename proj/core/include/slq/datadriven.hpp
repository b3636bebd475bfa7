#pragma once

// Partially model-free policy iteration. Given moment data collected once
// under an exploratory policy v = K0 X + e, every iteration solves the
// regression
//
//   V_i [vech(P_{i+1}); vec(M_{i+1})] = I_i,
//   V_i = [eta_xx - d_dv + d_dkx,  2 delta_xv - 2 delta_xx (I_n kron K_i')],
//   I_i = delta_xx vec(-Q_i + 2 K_i'S) - 2 delta_xv vec(S),
//
// then sets K_{i+1} = (R + D'P_{i+1}D)^{-1} M_{i+1}. Only D and the cost
// weights enter; the drift matrices and the state diffusion never do.

#include <vector>

#include "slq/cost.hpp"
#include "slq/data_matrices.hpp"
#include "slq/matops.hpp"

namespace slq {

struct LsqSystem {
  Matrix V;  // l x (n(n+1)/2 + m n)
  Vector I;  // l
  int iteration = 0;
};

/// E[int bar(D v) ds] per row, synthesized as delta_vv (D kron D)' L'.
Matrix derive_dv(const DataMatrices& data, const Matrix& D);

/// E[int bar(D K X) ds] per row, synthesized as delta_xx (DK kron DK)' L'.
Matrix derive_dkx(const DataMatrices& data, const Matrix& D, const Gain& K);

LsqSystem assemble(const DataMatrices& data, const Matrix& D,
                   const CostSpec& cost, const Gain& K, int iteration = 0);

struct LsqSolution {
  SymMatrix P;
  Matrix M;  // m x n
};

/// Least-squares solve by column-pivoted Householder QR. Throws
/// RankDeficientError when numeric_rank(V, rank_tol) is below the column
/// count.
LsqSolution lsq_solve(const LsqSystem& sys, Eigen::Index n, Eigen::Index m,
                      double rank_tol = 1e-8);

/// K = (R + D'PD)^{-1} M.
Gain gain_from_M(const CostSpec& cost, const Matrix& D, const SymMatrix& P,
                 const Matrix& M);

struct DDIteration {
  int index;
  double dP_frobenius;     // |P_i - P_{i+1}|_F, P_0 = 0
  double relative_misfit;  // |V z - I| / |I|
  SymMatrix P;             // P_{i+1}
  Gain K;                  // K_{i+1}
};

struct DDReport {
  SymMatrix P_tilde;
  Gain K_tilde;
  int iterations = 0;
  bool converged = false;
  RankCheck rank;
  std::vector<DDIteration> history;
};

struct DDOptions {
  double eps = 1e-3;
  int max_iter = 100;
  double rank_tol = 1e-8;
  /// Abort when cond(R + D'PD) exceeds this.
  double max_condition = 1e12;
};

/// Iterates assemble -> lsq_solve -> gain_from_M on fixed data until
/// |P_i - P_{i+1}|_F < eps. Throws RankDeficientError before the first
/// iteration if check_rank fails, NotConvergedError<DDReport> at max_iter
/// and NumericalBreakdownError on a non-finite or ill-conditioned iterate.
DDReport run_algorithm1(const DataMatrices& data, const Matrix& D,
                        const CostSpec& cost, const Gain& K0,
                        const DDOptions& opts = {});

}  // namespace slq
