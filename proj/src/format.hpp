#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace hbpo {

// Shortest representation that round-trips the exact double, matching the
// JSON serializer so CSV exports preserve full precision.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace hbpo
