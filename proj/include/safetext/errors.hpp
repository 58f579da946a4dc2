#pragma once

#include <stdexcept>
#include <string>

namespace safetext {

// Bad flags, bad config values, contract violations. CLI exit code 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Unreadable/malformed input files or datasets. CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf detected in a forward, backward, or update pass. CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace safetext
