#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace rnm {

/// Locale-independent number formatting for CSV output (shortest
/// round-trip form, '.' decimal separator on every platform).
inline std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

inline std::string format_number(std::uint64_t value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

inline std::string format_number(std::int64_t value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace rnm
