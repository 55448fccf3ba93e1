#pragma once

#include <stdexcept>
#include <string>

namespace zz {

enum class LogLevel : int { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

// Level comes from the ZZ_LOG environment variable (off|error|warn|info|debug),
// parsed once on first use. Default is warn.
LogLevel log_level();
void log_msg(LogLevel level, const std::string& msg);

inline void log_error(const std::string& msg) { log_msg(LogLevel::error, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::debug, msg); }

// A thinning acceptance ratio exceeded 1: the computational bound failed to
// dominate the realized event rate, so the invariant measure is no longer
// guaranteed. Always a bug in bound construction, never a recoverable state.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration (CLI flags, JSON config files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zz
