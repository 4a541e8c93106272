#pragma once

#include <stdexcept>
#include <string>

namespace cgm {

/// Operands were sampled on different TimeGrid objects.
class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what)
      : std::invalid_argument("incompatible discretizations: " + what) {}
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerical methods themselves (exit code 3 in the CLI).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The implicit trapezoid step 1 + (dt/2) K(0) vanished.
class DegenerateStep : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// R(T) = 0 at the requested horizon, so the d_n asymptotics carry no information.
class HypothesisViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Extended-precision solve did not reach the residual target at any tried precision.
class PrecisionExhausted : public NumericalError {
 public:
  PrecisionExhausted(const std::string& what, double log10_condition)
      : NumericalError(what), log10_condition_(log10_condition) {}
  double log10_condition() const noexcept { return log10_condition_; }

 private:
  double log10_condition_;
};

}  // namespace cgm
