#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ods/policy.hpp"
#include "ods/rebac.hpp"

namespace ods {

/// A compiled duty. The check engine never enforces these; the pipeline
/// surfaces them for downstream usage-control machinery.
struct ObligationRecord {
  ActionTerm action;
  Iri target;
  std::map<std::string, Value> parameters;
  std::string source_rule_path;

  bool operator==(const ObligationRecord&) const = default;
  auto operator<=>(const ObligationRecord&) const = default;
};

struct CompilationResult {
  AuthorizationModel model;
  std::vector<RelationshipTuple> tuples;        // deduplicated, canonically sorted
  std::vector<ObligationRecord> obligations;    // sorted by source path
  std::vector<Diagnostic> diagnostics;          // warnings carried over; never errors
  std::map<std::string, Iri> iri_map;           // "type:id" -> source IRI
};

/// Lowers one validated policy. Throws ValidationFailed when profile
/// validation reports errors, UnsupportedConstruct for constructs with no
/// mapping rule, IdCollision when two IRIs derive the same id.
CompilationResult compile_policy(const OdrlPolicy& policy);

/// Union of the per-policy results with a deterministic model merge.
/// Throws MergeConflict when two policies define the same relation with
/// different rewrite trees.
CompilationResult compile_policy_set(std::span<const OdrlPolicy> policies);

/// Maps a single constraint to a named condition. `role_hint` participates
/// in the name hash when non-empty (reserved for role-scoped attachment).
/// Count constraints have no relationship mapping and throw
/// UnsupportedConstruct.
ConditionDef compile_constraint(const Constraint& constraint, std::string_view role_hint = {});

/// Tuple file: `# iris {...}` sidecar header followed by canonical tuple
/// lines, newline-terminated.
std::string render_tuple_file(const std::vector<RelationshipTuple>& tuples,
                              const std::map<std::string, Iri>& iri_map);
std::vector<RelationshipTuple> parse_tuple_file(std::string_view document);

/// Obligation file: one record per line, fields in the order
/// action, target, parameters, source_rule_path.
std::string render_obligations(const std::vector<ObligationRecord>& obligations);

}  // namespace ods
