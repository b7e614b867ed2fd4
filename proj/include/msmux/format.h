#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace msmux {

inline constexpr int kDefaultSignificantDigits = 6;

// "%.6g"-style rendering; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double x, int digits = kDefaultSignificantDigits);
std::string format_optional(const std::optional<double>& x,
                            int digits = kDefaultSignificantDigits);

// JSON value rounded to `digits` significant digits. Infinity becomes the
// string "inf"; NaN becomes null.
nlohmann::json json_number(double x, int digits = kDefaultSignificantDigits);
nlohmann::json json_optional(const std::optional<double>& x,
                             int digits = kDefaultSignificantDigits);

// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace msmux
