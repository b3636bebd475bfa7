#pragma once

#include <stdexcept>
#include <string>

namespace slq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A problem instance or configuration violates a precondition of the
/// solvers (cost definiteness, stabilizing initial gain, grid layout...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The generalized Lyapunov operator is singular, i.e. the closed loop is
/// not mean-square stable. `iteration` is the policy-iteration index at
/// which it happened, or -1 for a standalone solve.
class SingularGeneratorError : public Error {
 public:
  SingularGeneratorError(const std::string& what, int iteration = -1)
      : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// The regression data does not identify the unknowns.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, int rank, int required)
      : Error(what), rank_(rank), required_(required) {}
  int rank() const noexcept { return rank_; }
  int required() const noexcept { return required_; }

 private:
  int rank_;
  int required_;
};

/// Non-finite iterate, ill-conditioned gain denominator or failed
/// eigen-decomposition.
class NumericalBreakdownError : public Error {
 public:
  using Error::Error;
};

/// Simulated state exceeded the overflow guard.
class TrajectoryBlowupError : public Error {
 public:
  using Error::Error;
};

/// Iteration limit reached before the stopping rule was met. Carries the
/// partial report of the solver that raised it.
template <class Report>
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& what, Report report)
      : Error(what), report_(std::move(report)) {}
  const Report& report() const noexcept { return report_; }

 private:
  Report report_;
};

}  // namespace slq
