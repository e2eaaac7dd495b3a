#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace periodforge {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (precision, family index, CLI flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parameter vector or branch divisor violates its ordering or domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation of w^2 at a pole.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// Evaluation of w exactly at a branch location.
class BranchPointError : public Error {
 public:
  using Error::Error;
};

/// Segment that cannot carry a period integral.
class InvalidSegmentError : public Error {
 public:
  using Error::Error;
};

/// A family kind has no rule for the requested operation.
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

/// Numeric failure inside an algorithm (quadrature, Newton, continuation).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Tanh-sinh refinement ran out of levels. Carries the last two estimates.
class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, std::string previous, std::string last)
      : NumericError(what + " (last estimates " + previous + ", " + last + ")"),
        previous_(std::move(previous)),
        last_(std::move(last)) {}
  const std::string& previousEstimate() const { return previous_; }
  const std::string& lastEstimate() const { return last_; }

 private:
  std::string previous_;
  std::string last_;
};

/// Newton ran out of iterations or could not reduce the residual.
class NonConvergenceError : public NumericError {
 public:
  NonConvergenceError(const std::string& what, std::vector<std::string> bestIterate,
                      std::vector<std::string> residualHistory)
      : NumericError(what), best_(std::move(bestIterate)), history_(std::move(residualHistory)) {}
  const std::vector<std::string>& bestIterate() const { return best_; }
  const std::vector<std::string>& residualHistory() const { return history_; }

 private:
  std::vector<std::string> best_;
  std::vector<std::string> history_;
};

/// Every damped step left the parameter domain or broke the ordering chain.
class StructuralFailureError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace periodforge
