#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>

#include "mvperf/errors.hpp"

namespace mvperf {

// Shortest decimal form that round-trips back to the same double. Model
// files and logs are written with this so save -> load -> save is
// byte-identical.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw FormatError(what + ": bad numeric value '" + std::string(text) + "'");
  return v;
}

inline long long parse_int(std::string_view text, const std::string& what) {
  long long v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw FormatError(what + ": bad integer '" + std::string(text) + "'");
  return v;
}

}  // namespace mvperf
