#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

namespace msic {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

/// Level from the MSIC_LOG environment variable: "error", "info" (default),
/// or "debug". Unknown values fall back to info.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("MSIC_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    const std::string v(env);
    if (v == "error") return LogLevel::kError;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

inline void log_line(LogLevel level, const std::string& tag,
                     const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::ostream& out = (level == LogLevel::kError) ? std::cerr : std::clog;
  out << "[" << tag << "] " << message << "\n";
}

inline void log_error(const std::string& message) {
  log_line(LogLevel::kError, "error", message);
}
inline void log_info(const std::string& message) {
  log_line(LogLevel::kInfo, "info", message);
}
inline void log_debug(const std::string& message) {
  log_line(LogLevel::kDebug, "debug", message);
}

}  // namespace msic
