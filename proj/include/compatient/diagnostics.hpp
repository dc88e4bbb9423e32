#pragma once

#include <string>
#include <vector>

namespace compatient {

/// Emits a non-fatal warning. Goes to the innermost active WarningCapture on
/// this thread, or to stderr when none is active.
void warn(const std::string& message);

/// Collects warnings raised on the current thread for its lifetime.
/// Captures nest; the innermost one receives the messages.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  friend void warn(const std::string&);
  std::vector<std::string> messages_;
  WarningCapture* previous_ = nullptr;
};

}  // namespace compatient
