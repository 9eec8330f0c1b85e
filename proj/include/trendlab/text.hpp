#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab::text {

/// Shortest decimal that parses back to the identical double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view field);
std::optional<unsigned long long> parse_unsigned(std::string_view field);

/// Splits on ',' with no quoting support; strips a trailing '\r'.
std::vector<std::string_view> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

}  // namespace trendlab::text
