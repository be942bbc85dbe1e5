#pragma once

#include <string_view>

namespace granular {

enum class LogLevel { debug = 0, info = 1, warning = 2, silent = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
void log(LogLevel level, std::string_view message);

}  // namespace granular
