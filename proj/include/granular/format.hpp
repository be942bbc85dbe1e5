#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace granular {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view line, char delimiter);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace granular
