#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace practica {

// Fixed-point with at most 9 fractional digits, trailing zeros removed: 0.25 -> "0.25", 1.0 -> "1".
std::string format_decimal(double value);

// Shortest text that reads back to exactly `value`; integers print without a fraction.
std::string format_number(double value);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace practica
