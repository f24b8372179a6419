#include "ods/value.hpp"

#include <cstdio>
#include <ctime>

namespace ods {

const char* to_string(ValueType type) {
  switch (type) {
    case ValueType::Timestamp: return "timestamp";
    case ValueType::Text: return "text";
    case ValueType::Integer: return "integer";
    case ValueType::TextList: return "text_list";
  }
  return "?";
}

std::optional<std::int64_t> parse_rfc3339(std::string_view text) {
  if (text.size() != 20 || text.back() != 'Z') return std::nullopt;
  int y, mo, d, h, mi, s;
  char t, z;
  std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c", &y, &mo, &d, &t, &h, &mi, &s, &z) !=
      8)
    return std::nullopt;
  if ((t != 'T' && t != 't') || (z != 'Z')) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  return static_cast<std::int64_t>(timegm(&tm));
}

std::string format_rfc3339(std::int64_t utc_seconds) {
  std::time_t t = static_cast<std::time_t>(utc_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::string Value::render() const {
  switch (type) {
    case ValueType::Timestamp: return format_rfc3339(number);
    case ValueType::Integer: return std::to_string(number);
    case ValueType::Text: return text;
    case ValueType::TextList: {
      std::string out = "[";
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += ", ";
        out += '"' + list[i] + '"';
      }
      return out + "]";
    }
  }
  return {};
}

}  // namespace ods
