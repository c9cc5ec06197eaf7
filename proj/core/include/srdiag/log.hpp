#pragma once

#include <string>

namespace srdiag {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

/// Messages below this level are dropped. Default: kInfo.
void set_log_level(LogLevel level);
LogLevel log_level();

/// Writes "[srdiag] <level>: message" to stderr.
void log(LogLevel level, const std::string& message);

inline void log_info(const std::string& message) { log(LogLevel::kInfo, message); }
inline void log_warning(const std::string& message) { log(LogLevel::kWarning, message); }

/// Intra-op thread count for the linear algebra backend (no effect without OpenMP).
void set_threads(int threads);

}  // namespace srdiag
