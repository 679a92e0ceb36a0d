#pragma once

#include <cstdio>
#include <string>

namespace progeo::util {

enum class LogLevel : int { kQuiet = 0, kInfo = 1, kDebug = 2 };

// Controlled by the PROGEO_LOG environment variable (quiet|info|debug).
LogLevel log_level();

void log_info(const std::string& msg);
void log_warn(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace progeo::util
