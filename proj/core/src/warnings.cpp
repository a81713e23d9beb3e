#include "tracefail/warnings.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace tracefail {
namespace {

thread_local WarningCapture* active_capture = nullptr;

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& global_handler() {
  static WarningHandler h = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}

}  // namespace

void warn(std::string message) {
  if (active_capture != nullptr) {
    active_capture->messages_.push_back(std::move(message));
    return;
  }
  std::lock_guard lock(handler_mutex());
  if (global_handler()) {
    global_handler()(message);
  }
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(global_handler(), std::move(handler));
}

WarningCapture::WarningCapture() : previous_(active_capture) { active_capture = this; }

WarningCapture::~WarningCapture() { active_capture = previous_; }

std::vector<std::string> WarningCapture::take() { return std::exchange(messages_, {}); }

}  // namespace tracefail
