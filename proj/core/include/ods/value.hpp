#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ods {

enum class ValueType { Timestamp, Text, Integer, TextList };

const char* to_string(ValueType type);

/// Typed scalar used by constraints, condition parameters and check context.
/// Timestamps are UTC seconds since the epoch.
struct Value {
  ValueType type = ValueType::Text;
  std::int64_t number = 0;  // Timestamp or Integer
  std::string text;
  std::vector<std::string> list;

  static Value timestamp(std::int64_t seconds) { return {ValueType::Timestamp, seconds, {}, {}}; }
  static Value integer(std::int64_t n) { return {ValueType::Integer, n, {}, {}}; }
  static Value str(std::string s) { return {ValueType::Text, 0, std::move(s), {}}; }
  static Value strings(std::vector<std::string> v) {
    return {ValueType::TextList, 0, {}, std::move(v)};
  }

  bool operator==(const Value&) const = default;
  auto operator<=>(const Value&) const = default;

  /// Canonical single-token rendering (timestamps as RFC 3339).
  std::string render() const;
};

/// "2026-01-01T00:00:00Z" -> UTC seconds. Fractional seconds and numeric
/// offsets are not accepted; the toolchain works in UTC only.
std::optional<std::int64_t> parse_rfc3339(std::string_view text);
std::string format_rfc3339(std::int64_t utc_seconds);

}  // namespace ods
