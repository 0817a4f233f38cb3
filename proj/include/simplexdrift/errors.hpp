#pragma once

#include <stdexcept>
#include <string>

namespace simplexdrift {

// Bad user-supplied data (files, configs, out-of-domain values).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// ValidationError arising from a data file rather than configuration;
// lets callers map the two onto distinct exit codes.
struct DataError : ValidationError {
  explicit DataError(const std::string& msg) : ValidationError(msg) {}
};

// Numerical failure that survived all fallbacks (e.g. Cholesky at max jitter).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace simplexdrift
