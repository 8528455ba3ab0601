#pragma once

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>

#include "surfpde/errors.hpp"

namespace surfpde {

/// Shortest decimal string that parses back to exactly the same double;
/// locale-independent.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

/// Fixed 17-significant-digit general formatting: round-trips any double and
/// is byte-stable for identical inputs.
inline std::string format_double_17(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

/// Locale-independent double parser over a whole token; throws IoError with
/// the given context when the token is not a complete number.
inline double parse_double(std::string_view token, const std::string& context) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw IoError(context + ": invalid number '" + std::string(token) + "'");
  return v;
}

inline long long parse_integer(std::string_view token, const std::string& context) {
  long long v = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw IoError(context + ": invalid integer '" + std::string(token) + "'");
  return v;
}

} // namespace surfpde
