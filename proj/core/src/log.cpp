#include "srdiag/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include <Eigen/Core>

namespace srdiag {

namespace {

std::atomic<LogLevel> g_level{LogLevel::kInfo};
std::mutex g_mutex;

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarning: return "warning";
    case LogLevel::kError: return "error";
    case LogLevel::kOff: break;
  }
  return "";
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log(LogLevel level, const std::string& message) {
  if (level < g_level.load() || level == LogLevel::kOff) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[srdiag] " << level_name(level) << ": " << message << '\n';
}

void set_threads(int threads) { Eigen::setNbThreads(threads < 1 ? 1 : threads); }

}  // namespace srdiag
