#include "slq/problem.hpp"

#include <sstream>

#include "slq/errors.hpp"

namespace slq {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " must be " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + shape(m));
  }
}

}  // namespace

bool is_positive_definite(const SymMatrix& m, double rel_tol) {
  return m.min_eigenvalue() > rel_tol * (1.0 + m.max_abs_eigenvalue());
}

std::string CostViolation::message() const {
  std::ostringstream os;
  os << matrix << " is not positive definite (smallest eigenvalue "
     << min_eigenvalue << ")";
  return os.str();
}

std::optional<CostViolation> validate_cost(const CostSpec& cost) {
  const Eigen::Index n = cost.Q.dim();
  const Eigen::Index m = cost.R.dim();
  expect_shape(cost.S, m, n, "S");
  if (!is_positive_definite(cost.R)) {
    return CostViolation{CostViolation::Kind::RNotPositiveDefinite, "R",
                         cost.R.min_eigenvalue()};
  }
  const Matrix r_inv_s = cost.R.matrix().llt().solve(cost.S);
  const SymMatrix schur(cost.Q.matrix() - cost.S.transpose() * r_inv_s);
  if (!is_positive_definite(schur)) {
    return CostViolation{
        CostViolation::Kind::SchurComplementNotPositiveDefinite,
        "Q - S' R^-1 S", schur.min_eigenvalue()};
  }
  return std::nullopt;
}

void SystemModel::check() const {
  const Eigen::Index nn = A.rows();
  const Eigen::Index mm = B.cols();
  if (nn == 0 || mm == 0) throw DimensionError("empty system matrices");
  expect_shape(A, nn, nn, "A");
  expect_shape(B, nn, mm, "B");
  expect_shape(C, nn, nn, "C");
  expect_shape(D, nn, mm, "D");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
    throw ValidationError("system matrices contain non-finite entries");
  }
}

ClosedLoop closed_loop(const SystemModel& model, const Gain& K) {
  expect_shape(K, model.m(), model.n(), "K");
  return {model.A + model.B * K, model.C + model.D * K};
}

Matrix ms_generator(const Matrix& A_K, const Matrix& C_K) {
  const Eigen::Index n = A_K.rows();
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix at = A_K.transpose();
  const Matrix ct = C_K.transpose();
  return kron(eye, at) + kron(at, eye) + kron(ct, ct);
}

double ms_spectral_abscissa(const SystemModel& model, const Gain& K) {
  const ClosedLoop cl = closed_loop(model, K);
  Eigen::EigenSolver<Matrix> es(ms_generator(cl.A_K, cl.C_K),
                                /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalBreakdownError(
        "eigenvalue iteration failed on the second-moment generator");
  }
  return es.eigenvalues().real().maxCoeff();
}

bool is_ms_stabilizer(const SystemModel& model, const Gain& K, double margin) {
  return ms_spectral_abscissa(model, K) < -margin;
}

void validate_problem(const ProblemSpec& spec) {
  spec.model.check();
  const Eigen::Index n = spec.model.n(), m = spec.model.m();
  expect_shape(spec.cost.Q, n, n, "Q");
  expect_shape(spec.cost.R, m, m, "R");
  expect_shape(spec.cost.S, m, n, "S");
  expect_shape(spec.K0, m, n, "K0");
  if (spec.x0.size() != n) {
    throw DimensionError("x0 must have " + std::to_string(n) +
                         " entries, got " + std::to_string(spec.x0.size()));
  }
  if (auto violation = validate_cost(spec.cost)) {
    throw ValidationError("cost weights violate the well-posedness condition: " +
                          violation->message());
  }
  const double abscissa = ms_spectral_abscissa(spec.model, spec.K0);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "K0 is not a mean-square stabilizer: second-moment spectral "
          "abscissa is "
       << abscissa << " (must be negative)";
    throw ValidationError(os.str());
  }
}

}  // namespace slq
