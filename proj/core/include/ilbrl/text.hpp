#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ilbrl::text {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Parses a full token as a double / integer; throws ParseError otherwise.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

/// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view line);

/// Splits on a single-character delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view line, char delimiter);

std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes: truncate + write + check.
void write_file(const std::string& path, std::string_view contents);

}  // namespace ilbrl::text
