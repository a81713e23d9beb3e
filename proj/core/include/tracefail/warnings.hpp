#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tracefail {

using WarningHandler = std::function<void(std::string_view)>;

/// Emits a non-fatal diagnostic. Goes to the innermost WarningCapture on the
/// calling thread, or to the process-wide handler (stderr by default).
void warn(std::string message);

/// Replaces the process-wide handler; returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

/// Collects warnings raised on the current thread while alive. Captures nest.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  [[nodiscard]] const std::vector<std::string>& messages() const { return messages_; }
  std::vector<std::string> take();

 private:
  friend void warn(std::string message);
  std::vector<std::string> messages_;
  WarningCapture* previous_;
};

}  // namespace tracefail
