#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace ods {

/// Absolute IRI. Equality ignores case differences in the scheme and host;
/// the original spelling is preserved for serialization.
class Iri {
 public:
  Iri() = default;
  /// Throws MalformedDocument if `text` is empty or lacks a scheme separator.
  explicit Iri(std::string text);

  const std::string& text() const { return text_; }
  const std::string& normalized() const { return normalized_; }

  /// Segment after the last '/', '#' or ':', lowercased. Used to derive
  /// object/user ids. Throws MalformedDocument when the segment is empty.
  std::string last_segment() const;

  friend bool operator==(const Iri& a, const Iri& b) { return a.normalized_ == b.normalized_; }
  friend std::strong_ordering operator<=>(const Iri& a, const Iri& b) {
    return a.normalized_ <=> b.normalized_;
  }

  static bool looks_like_iri(std::string_view text);

 private:
  std::string text_;
  std::string normalized_;
};

}  // namespace ods
