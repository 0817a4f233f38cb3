#include "simplexdrift/warnings.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace simplexdrift {

namespace {

std::mutex handler_mutex;
WarningHandler current_handler;

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(handler_mutex);
  current_handler = std::move(handler);
}

void emit_warning(const std::string& message) {
  std::lock_guard<std::mutex> lock(handler_mutex);
  if (current_handler) {
    current_handler(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

}  // namespace simplexdrift
