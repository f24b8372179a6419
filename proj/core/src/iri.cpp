#include "ods/iri.hpp"

#include <algorithm>
#include <cctype>

#include "ods/error.hpp"

namespace ods {

namespace {

bool valid_scheme(std::string_view text, std::size_t colon) {
  if (colon == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(text[0]))) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    char c = text[i];
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  return true;
}

std::string normalize(std::string_view text) {
  std::string out(text);
  auto colon = out.find(':');
  std::transform(out.begin(), out.begin() + static_cast<long>(colon), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  // host part, when an authority component is present
  if (out.compare(colon, 3, "://") == 0) {
    auto host_begin = colon + 3;
    auto host_end = out.find_first_of("/?#", host_begin);
    if (host_end == std::string::npos) host_end = out.size();
    std::transform(out.begin() + static_cast<long>(host_begin),
                   out.begin() + static_cast<long>(host_end),
                   out.begin() + static_cast<long>(host_begin),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return out;
}

}  // namespace

Iri::Iri(std::string text) : text_(std::move(text)) {
  if (!looks_like_iri(text_))
    throw OdsError(ErrorKind::MalformedDocument, "not an absolute IRI: '" + text_ + "'");
  normalized_ = normalize(text_);
}

bool Iri::looks_like_iri(std::string_view text) {
  auto colon = text.find(':');
  return !text.empty() && colon != std::string_view::npos && valid_scheme(text, colon) &&
         colon + 1 < text.size();
}

std::string Iri::last_segment() const {
  auto pos = text_.find_last_of("/#:");
  std::string seg = text_.substr(pos + 1);
  if (seg.empty())
    throw OdsError(ErrorKind::MalformedDocument, "IRI has no final segment: '" + text_ + "'");
  std::transform(seg.begin(), seg.end(), seg.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return seg;
}

}  // namespace ods
