#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aew {

// Shortest decimal string that parses back to the exact same double.
inline std::string full_precision(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_finite_double(std::string_view s) {
  double v = 0.0;
  const char* last = s.data() + s.size();
  auto res = std::from_chars(s.data(), last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  if (!std::isfinite(v))
    throw std::invalid_argument("non-finite value rejected: '" + std::string(s) + "'");
  return v;
}

}  // namespace aew
