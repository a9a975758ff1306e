#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace csnk::csv {

/// Shortest decimal that parses back to the same double ("nan", "inf", "-inf"
/// for non-finite values).
std::string format_double(double x);

/// Inverse of format_double; throws ParseError on malformed text.
double parse_double(std::string_view text);

/// Splits one CSV line on commas. Fields never contain quotes or commas here.
std::vector<std::string_view> split_line(std::string_view line);

}  // namespace csnk::csv
