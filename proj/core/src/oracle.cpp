#include "slq/oracle.hpp"

#include <string>

#include "slq/errors.hpp"

namespace slq {

namespace {

// Below this reciprocal condition estimate the Lyapunov operator is
// treated as singular.
constexpr double kSingularRcond = 1e-14;

}  // namespace

SymMatrix solve_glyap(const Matrix& A, const Matrix& C, const SymMatrix& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.rows() != n || C.cols() != n || Q.dim() != n) {
    throw DimensionError("solve_glyap: A, C and Q must all be " +
                         std::to_string(n) + "x" + std::to_string(n));
  }
  const Matrix op = ms_generator(A, C);
  Eigen::PartialPivLU<Matrix> lu(op);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    throw SingularGeneratorError(
        "generalized Lyapunov operator is singular (rcond " +
        std::to_string(rcond) + "); the closed loop is not mean-square stable");
  }
  const Vector p = lu.solve(-vecm(Q.matrix()));
  return SymMatrix(unvecm(p, n, n));
}

SymMatrix policy_cost(const CostSpec& cost, const Gain& K) {
  const Matrix sk = cost.S.transpose() * K;
  return SymMatrix(sk + sk.transpose() + K.transpose() * cost.R.matrix() * K +
                   cost.Q.matrix());
}

Gain gain_update(const SystemModel& model, const CostSpec& cost,
                 const SymMatrix& P) {
  const Matrix& p = P.matrix();
  const Matrix denom = cost.R.matrix() + model.D.transpose() * p * model.D;
  const Matrix numer =
      model.B.transpose() * p + model.D.transpose() * p * model.C + cost.S;
  return -denom.ldlt().solve(numer);
}

SymMatrix sare_residual(const SystemModel& model, const CostSpec& cost,
                        const SymMatrix& P, const Gain& K) {
  const ClosedLoop cl = closed_loop(model, K);
  const Matrix& p = P.matrix();
  const Matrix pa = p * cl.A_K;
  return SymMatrix(pa + pa.transpose() + cl.C_K.transpose() * p * cl.C_K +
                   policy_cost(cost, K).matrix());
}

SymMatrix sare_residual_closed(const SystemModel& model, const CostSpec& cost,
                               const SymMatrix& P) {
  const Matrix& p = P.matrix();
  const Matrix pa = p * model.A;
  const Matrix cross = model.D.transpose() * p * model.C +
                       model.B.transpose() * p + cost.S;  // m x n
  const Matrix denom = cost.R.matrix() + model.D.transpose() * p * model.D;
  return SymMatrix(pa + pa.transpose() + model.C.transpose() * p * model.C +
                   cost.Q.matrix() -
                   cross.transpose() * denom.ldlt().solve(cross));
}

OracleReport policy_iteration(const ProblemSpec& spec,
                              const OracleOptions& opts) {
  const SystemModel& model = spec.model;
  const CostSpec& cost = spec.cost;
  const Eigen::Index n = model.n();

  OracleReport report;
  Gain K = spec.K0;
  SymMatrix P_prev(n);

  for (int i = 0; i < opts.max_iter; ++i) {
    const ClosedLoop cl = closed_loop(model, K);
    SymMatrix P;
    try {
      P = solve_glyap(cl.A_K, cl.C_K, policy_cost(cost, K));
    } catch (const SingularGeneratorError& e) {
      throw SingularGeneratorError(
          std::string(e.what()) + " at iteration " + std::to_string(i), i);
    }
    if (!P.matrix().allFinite()) {
      throw NumericalBreakdownError("non-finite value matrix at iteration " +
                                    std::to_string(i));
    }
    Gain K_next = gain_update(model, cost, P);
    const double dP = frobenius_distance(P_prev.matrix(), P.matrix());
    const double res = sare_residual_closed(model, cost, P).matrix().norm();
    report.history.push_back({i, dP, res, P, K_next});
    report.iterations = i + 1;
    report.P_star = P;
    report.K_star = K_next;

    if (dP < opts.eps) {
      report.converged = true;
      return report;
    }
    P_prev = std::move(P);
    K = std::move(K_next);
  }
  throw NotConvergedError<OracleReport>(
      "policy iteration did not converge within " +
          std::to_string(opts.max_iter) + " iterations",
      std::move(report));
}

}  // namespace slq
