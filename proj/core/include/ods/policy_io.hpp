#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ods/diagnostics.hpp"
#include "ods/policy.hpp"

namespace ods {

struct ParseResult {
  OdrlPolicy policy;
  std::vector<Diagnostic> diagnostics;  // warnings only; hard failures throw
};

/// Parses the compact policy document form. Unknown keys produce ODS104
/// warnings and are dropped. Throws OdsError with kind MalformedDocument,
/// UnknownTerm or MissingRequired.
ParseResult parse_policy(std::string_view document);

/// Canonical serialization: fixed key order, two-space indent, trailing
/// newline. parse_policy(serialize_policy(p)).policy == p.
std::string serialize_policy(const OdrlPolicy& policy);

}  // namespace ods
