#include "compatient/diagnostics.hpp"
#include "compatient/errors.hpp"

#include <iostream>

namespace compatient {
namespace {
thread_local WarningCapture* active_capture = nullptr;
}

void warn(const std::string& message) {
  if (active_capture != nullptr) {
    active_capture->messages_.push_back(message);
    return;
  }
  std::cerr << "warning: " << message << '\n';
}

WarningCapture::WarningCapture() : previous_(active_capture) { active_capture = this; }

WarningCapture::~WarningCapture() { active_capture = previous_; }

bool WarningCapture::contains(const std::string& needle) const {
  for (const auto& m : messages_) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

ConfigError::ConfigError(std::string field, std::string what, int line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + field + ": " + what : field + ": " + what),
      field_(std::move(field)),
      line_(line) {}

NumericalError::NumericalError(std::string module, std::string what)
    : Error("module '" + module + "': " + what), module_(std::move(module)) {}

NonFiniteState::NonFiniteState(std::string module, std::string variable, double time_s)
    : NumericalError(std::move(module),
                     "non-finite value in state '" + variable + "' at t = " + std::to_string(time_s) + " s"),
      variable_(std::move(variable)) {}

}  // namespace compatient
