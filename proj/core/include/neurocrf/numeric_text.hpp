#pragma once

#include <string>
#include <string_view>

namespace neurocrf {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Fixed-point with `digits` decimals, for results tables.
std::string format_fixed(double value, int digits);

/// Strict parse of the whole token; throws std::invalid_argument.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);
unsigned long long parse_unsigned(std::string_view text);

}  // namespace neurocrf
