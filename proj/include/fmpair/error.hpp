#pragma once

#include <stdexcept>
#include <string>

namespace fmpair {

/// Invalid configuration or precondition violation (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: quadrature non-convergence, step underflow, branch loss (exit 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrator step-size underflow; carries the time where it happened.
class StepUnderflow : public NumericalError {
 public:
  StepUnderflow(const std::string& what, double t) : NumericalError(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// File system or stream failure (exit 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fmpair
