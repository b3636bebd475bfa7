#include "slq/datadriven.hpp"

#include <limits>
#include <sstream>
#include <string>

#include "slq/errors.hpp"

namespace slq {

namespace {

void expect_D(const DataMatrices& data, const Matrix& D) {
  if (D.rows() != data.n || D.cols() != data.m) {
    throw DimensionError("D must be " + std::to_string(data.n) + "x" +
                         std::to_string(data.m) + " to match the data, got " +
                         std::to_string(D.rows()) + "x" +
                         std::to_string(D.cols()));
  }
}

void expect_gain(const DataMatrices& data, const Gain& K) {
  if (K.rows() != data.m || K.cols() != data.n) {
    throw DimensionError("gain must be " + std::to_string(data.m) + "x" +
                         std::to_string(data.n));
  }
}

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  return smallest > 0.0 ? sv(0) / smallest
                        : std::numeric_limits<double>::infinity();
}

}  // namespace

Matrix derive_dv(const DataMatrices& data, const Matrix& D) {
  data.check();
  expect_D(data, D);
  return data.delta_vv * kron(D, D).transpose() *
         monomial_selector(data.n).transpose();
}

Matrix derive_dkx(const DataMatrices& data, const Matrix& D, const Gain& K) {
  data.check();
  expect_D(data, D);
  expect_gain(data, K);
  const Matrix dk = D * K;
  return data.delta_xx * kron(dk, dk).transpose() *
         monomial_selector(data.n).transpose();
}

LsqSystem assemble(const DataMatrices& data, const Matrix& D,
                   const CostSpec& cost, const Gain& K, int iteration) {
  data.check();
  expect_D(data, D);
  expect_gain(data, K);
  const Eigen::Index n = data.n, m = data.m, tri = tri_size(n);
  if (cost.Q.dim() != n || cost.R.dim() != m || cost.S.rows() != m ||
      cost.S.cols() != n) {
    throw DimensionError("cost weights do not match the data dimensions");
  }

  LsqSystem sys;
  sys.iteration = iteration;
  sys.V.resize(data.l, tri + m * n);
  sys.V.leftCols(tri) = data.eta_xx - derive_dv(data, D) + derive_dkx(data, D, K);
  sys.V.rightCols(m * n) =
      2.0 * data.delta_xv -
      2.0 * data.delta_xx * kron(Matrix::Identity(n, n), K.transpose());

  // Q_i = S'K + K'RK + K'S + Q
  const Matrix sk = cost.S.transpose() * K;
  const Matrix q_i =
      sk + sk.transpose() + K.transpose() * cost.R.matrix() * K + cost.Q.matrix();
  sys.I = data.delta_xx * vecm(-q_i + 2.0 * K.transpose() * cost.S) -
          2.0 * data.delta_xv * vecm(cost.S);
  return sys;
}

LsqSolution lsq_solve(const LsqSystem& sys, Eigen::Index n, Eigen::Index m,
                      double rank_tol) {
  const Eigen::Index tri = tri_size(n);
  if (sys.V.cols() != tri + m * n || sys.V.rows() != sys.I.size()) {
    throw DimensionError("least-squares system has inconsistent shape");
  }
  const int rank = numeric_rank(sys.V, rank_tol);
  if (rank < sys.V.cols()) {
    std::ostringstream os;
    os << "regression matrix is rank deficient at iteration " << sys.iteration
       << " (rank " << rank << " of " << sys.V.cols()
       << "); the data lacks excitation";
    throw RankDeficientError(os.str(), rank, static_cast<int>(sys.V.cols()));
  }
  const Vector z = sys.V.colPivHouseholderQr().solve(sys.I);
  return {unvech_scaled(z.head(tri)), unvecm(z.tail(m * n), m, n)};
}

Gain gain_from_M(const CostSpec& cost, const Matrix& D, const SymMatrix& P,
                 const Matrix& M) {
  const Matrix denom = cost.R.matrix() + D.transpose() * P.matrix() * D;
  return denom.partialPivLu().solve(M);
}

DDReport run_algorithm1(const DataMatrices& data, const Matrix& D,
                        const CostSpec& cost, const Gain& K0,
                        const DDOptions& opts) {
  data.check();
  expect_D(data, D);
  expect_gain(data, K0);
  if (!(opts.eps > 0.0)) throw ValidationError("eps must be positive");
  if (!data.all_finite()) {
    throw NumericalBreakdownError("data matrices contain non-finite entries");
  }

  DDReport report;
  report.rank = check_rank(data, opts.rank_tol);
  if (!report.rank.ok) {
    std::ostringstream os;
    os << "rank([delta_xx, delta_xv]) = " << report.rank.rank << " but "
       << report.rank.required
       << " is required; add exploration noise or sampling intervals";
    throw RankDeficientError(os.str(), report.rank.rank, report.rank.required);
  }

  const Eigen::Index n = data.n, m = data.m;
  Gain K = K0;
  SymMatrix P_prev(n);
  for (int i = 0; i < opts.max_iter; ++i) {
    const LsqSystem sys = assemble(data, D, cost, K, i);
    LsqSolution sol = lsq_solve(sys, n, m, opts.rank_tol);

    const Matrix denom = cost.R.matrix() + D.transpose() * sol.P.matrix() * D;
    const double cond = condition_number(denom);
    if (!sol.P.matrix().allFinite() || !sol.M.allFinite() ||
        !(cond <= opts.max_condition)) {
      std::ostringstream os;
      os << "numerical breakdown at iteration " << i
         << " (cond(R + D'PD) = " << cond << ")";
      throw NumericalBreakdownError(os.str());
    }
    Gain K_next = gain_from_M(cost, D, sol.P, sol.M);

    Vector z(sys.V.cols());
    z << vech_scaled(sol.P), vecm(sol.M);
    const double i_norm = sys.I.norm();
    const double misfit =
        (sys.V * z - sys.I).norm() / (i_norm > 0.0 ? i_norm : 1.0);
    const double dP = frobenius_distance(P_prev.matrix(), sol.P.matrix());

    report.history.push_back({i, dP, misfit, sol.P, K_next});
    report.iterations = i + 1;
    report.P_tilde = sol.P;
    report.K_tilde = K_next;
    if (dP < opts.eps) {
      report.converged = true;
      return report;
    }
    P_prev = std::move(sol.P);
    K = std::move(K_next);
  }
  throw NotConvergedError<DDReport>(
      "data-driven iteration did not converge within " +
          std::to_string(opts.max_iter) + " iterations",
      std::move(report));
}

}  // namespace slq
