#pragma once

#include <string_view>
#include <vector>

#include "ods/diagnostics.hpp"
#include "ods/policy.hpp"

namespace ods {

/// Profile conformance check over a parsed policy. Returns every finding,
/// sorted by (path, code); an empty list means the policy is conformant.
/// Error-severity findings make the compiler refuse the policy.
std::vector<Diagnostic> validate(const OdrlPolicy& policy);

/// Document-level entry point used by the CLI and service: parses, maps
/// parse-stage term failures to catalogue diagnostics (ODS002), and appends
/// profile findings. MalformedDocument / MissingRequired still throw.
std::vector<Diagnostic> validate_document(std::string_view document);

}  // namespace ods
