#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spectral {

/// Shortest decimal that parses back to exactly the same double.
std::string format_double(double value);

/// Strict parse of a whole token; throws InputError naming `what` on failure.
double parse_double(std::string_view token, std::string_view what = "number");
long long parse_integer(std::string_view token, std::string_view what = "integer");

/// Whitespace-separated tokens of one line.
std::vector<std::string_view> split_tokens(std::string_view line);

} // namespace spectral
