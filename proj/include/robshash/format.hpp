#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robshash {

/// Shortest round-trip decimal form (std::to_chars); "nan", "inf", "-inf".
std::string format_double(double v);
/// Empty string for an absent value.
std::string format_double(std::optional<double> v);

/// Locale-independent strict parse of the whole (trimmed) text.
std::optional<double> parse_double(std::string_view text);

std::string_view trim(std::string_view s) noexcept;

/// Splits on `sep` outside parentheses and trims each piece; empty input
/// gives an empty list.
std::vector<std::string> split_list(std::string_view s, char sep = ',');

}  // namespace robshash
