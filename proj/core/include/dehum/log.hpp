#pragma once

#include <string>

namespace dehum {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Initialized from the DEHUM_LOG environment variable on first use
// (error|warn|info|debug, default warn).
LogLevel log_level();
void set_log_level(LogLevel level);

// Writes "[level] message" to stderr when `level` is at or below the
// configured verbosity.
void log_message(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log_message(LogLevel::error, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }

} // namespace dehum
