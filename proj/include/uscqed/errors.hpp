#pragma once

#include <stdexcept>
#include <string>

namespace uscqed {

/// Invalid or inconsistent configuration (bad parameter values, dimension guard).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameter outside the supported model family, e.g. a coupling phase not in {0, pi}.
class UnsupportedParameter : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Operation applied to the wrong kind of mode or to objects on different spaces.
class ModeTypeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Precondition of a numerical routine violated by its caller (non-Hermitian input, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Truncation did not converge within the dimension guard.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gap search bracket holds no interior minimum or more than one.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-step propagation lost more norm than allowed; retry with a smaller step.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uscqed
