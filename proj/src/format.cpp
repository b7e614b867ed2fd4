#include "msmux/format.h"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

namespace msmux {

std::string format_number(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.{}g}", x, digits);
  if (s == "-0") s = "0";
  return s;
}

std::string format_optional(const std::optional<double>& x, int digits) {
  return x ? format_number(*x, digits) : "nan";
}

nlohmann::json json_number(double x, int digits) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return std::strtod(format_number(x, digits).c_str(), nullptr);
}

nlohmann::json json_optional(const std::optional<double>& x, int digits) {
  return x ? json_number(*x, digits) : nlohmann::json(nullptr);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace msmux
