#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sphcode {

/// Locale-free general-format rendering with `sig` significant digits.
std::string format_sig(double value, int sig = 12);
/// Shortest text that parses back to the same double.
std::string format_shortest(double value);
/// value rounded to `sig` significant digits (what format_sig prints).
double round_sig(double value, int sig = 12);
/// Locale-free strict parse of a whole token.
std::optional<double> parse_double(std::string_view text);

}  // namespace sphcode
