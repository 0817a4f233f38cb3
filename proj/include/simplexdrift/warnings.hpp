#pragma once

#include <functional>
#include <string>

namespace simplexdrift {

using WarningHandler = std::function<void(const std::string&)>;

// replaces the process-wide handler (default writes to stderr); pass nullptr to restore
void set_warning_handler(WarningHandler handler);

// thread-safe; safe to call from parallel chains
void emit_warning(const std::string& message);

}  // namespace simplexdrift
