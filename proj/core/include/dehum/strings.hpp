#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dehum {

// ASCII-only lowercasing; bytes outside [A-Z] pass through unchanged.
std::string lower_ascii(std::string_view s);

std::string_view trim(std::string_view s);

// Splits on a single delimiter byte. Keeps empty fields, so
// split("a\t\tb", '\t') has three elements.
std::vector<std::string> split(std::string_view s, char delim);

// Splits on runs of ASCII whitespace; never yields empty chunks.
std::vector<std::string> split_whitespace(std::string_view s);

// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

// Fixed-point formatting used for SVG coordinates.
std::string format_fixed(double value, int digits);

// Strict numeric parsing: the whole field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

} // namespace dehum
