#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace ods {

enum class Severity { Error, Warning };

inline const char* to_string(Severity severity) {
  return severity == Severity::Error ? "ERROR" : "WARNING";
}

// Diagnostic catalogue:
//   ODS001 (error)   agreement rule missing assignee or assigner
//   ODS002 (error)   unknown action or party term
//   ODS003 (error)   constraint operand/operator/value mismatch
//   ODS004 (error)   duty attached to a non-permission rule
//   ODS005 (error)   role term where a concrete identity is required
//   ODS101 (warning) profile IRI absent while profile terms are used
//   ODS102 (warning) retention rule without a temporal or count constraint
//   ODS103 (warning) monitor party attached to a permission
//   ODS104 (warning) unknown document key ignored
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::string path;

  bool operator==(const Diagnostic&) const = default;
};

inline std::string render(const Diagnostic& d) {
  return std::string(to_string(d.severity)) + " " + d.code + " " + d.path + ": " + d.message;
}

inline std::string render(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) out += render(d) + "\n";
  return out;
}

inline void sort_diagnostics(std::vector<Diagnostic>& diagnostics) {
  std::sort(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.path != b.path) return a.path < b.path;
    return a.code < b.code;
  });
}

inline bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace ods
