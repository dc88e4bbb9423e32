#pragma once

#include <stdexcept>
#include <string>

namespace compatient {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: scenario files, parameter overrides, CLI values.
/// Carries the offending field and, when parsed from a file, its line.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string what, int line = 0);

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_ = 0;
};

/// Failures raised while integrating a module.
class NumericalError : public Error {
 public:
  NumericalError(std::string module, std::string what);
  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

class StepFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFiniteState : public NumericalError {
 public:
  NonFiniteState(std::string module, std::string variable, double time_s);
  const std::string& variable() const { return variable_; }

 private:
  std::string variable_;
};

/// Composition wiring errors, detected before anything is integrated.
class WiringError : public Error {
 public:
  using Error::Error;
};

class UnitMismatch : public WiringError {
 public:
  using WiringError::WiringError;
};

class CycleDetected : public WiringError {
 public:
  using WiringError::WiringError;
};

}  // namespace compatient
