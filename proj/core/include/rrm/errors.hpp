#pragma once

#include <stdexcept>
#include <string>

namespace rrm {

// Error taxonomy mirrored by the CLI exit codes: bad configuration,
// invalid object state (e.g. sampling an empty distribution), and
// numeric failures (non-finite values reaching a kernel).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StateError : std::runtime_error {
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitState = 3;
inline constexpr int kExitNumeric = 4;

}  // namespace rrm
