#include "progeo/util/log.hpp"

#include <cstdlib>
#include <cstring>

namespace progeo::util {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PROGEO_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    if (std::strcmp(env, "quiet") == 0 || std::strcmp(env, "0") == 0) return LogLevel::kQuiet;
    if (std::strcmp(env, "debug") == 0 || std::strcmp(env, "2") == 0) return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::fprintf(stderr, "[progeo] %s\n", msg.c_str());
}

void log_warn(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::fprintf(stderr, "[progeo] warning: %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) std::fprintf(stderr, "[progeo] %s\n", msg.c_str());
}

}  // namespace progeo::util
