#pragma once

#include <map>
#include <string>
#include <vector>

#include "ods/rebac.hpp"

namespace ods {

inline constexpr int kMaxResolutionDepth = 25;

struct CheckRequest {
  ObjectRef object;
  std::string relation;
  UserRef user;  // direct subjects only
  std::map<std::string, Value> context;
  std::vector<RelationshipTuple> contextual_tuples;
};

struct Decision {
  bool allowed = false;
  std::uint64_t nodes_visited = 0;
  std::uint32_t max_depth_reached = 0;
  bool cycle_detected = false;
  std::vector<std::string> missing_context;  // sorted, unique
};

struct CheckOptions {
  bool memoize = true;
};

/// Recursive userset-rewrite resolution over the stored + contextual tuples.
/// Missing condition context and cycles both fail closed; the Decision
/// records why. Throws UnknownTypeOrRelation when the requested relation is
/// not in the model, MalformedContext on context type mismatches.
Decision check(const std::vector<RelationshipTuple>& tuples, const AuthorizationModel& model,
               const CheckRequest& request, const CheckOptions& options = {});

struct CondResult {
  enum class Status { True, False, Missing };
  Status status = Status::False;
  std::vector<std::string> missing;
};

/// Evaluates a compiled condition. Request context overrides tuple context
/// on key collision. Throws TypeMismatch when a supplied value has the
/// wrong type for its declared parameter.
CondResult evaluate_condition(const ConditionDef& condition,
                              const std::map<std::string, Value>& tuple_context,
                              const std::map<std::string, Value>& request_context);

struct ExpandNode {
  enum class Kind { Leaf, Union, Intersection, Difference };
  Kind kind = Kind::Leaf;
  std::string label;                // relation or description, for debugging
  std::vector<std::string> users;   // Leaf only; rendered direct users
  std::vector<ExpandNode> children; // Difference: [base, subtract]
};

/// Mirrors the rewrite structure with resolved user leaves. Conditioned
/// tuples are resolved with an empty context (conditions denied), so the
/// flattened set equals the check-allowed set on condition-free models.
ExpandNode expand(const std::vector<RelationshipTuple>& tuples, const AuthorizationModel& model,
                  const ObjectRef& object, const std::string& relation,
                  int max_depth = kMaxResolutionDepth);

/// Set-algebra flattening of an expand tree.
std::vector<std::string> flatten(const ExpandNode& node);

/// Reference resolver: computes the full userset map by iterated fixpoint
/// and answers by membership. Intended for conformance testing only
/// (model depth <= 10, tuple count <= 10000).
Decision oracle_check(const std::vector<RelationshipTuple>& tuples,
                      const AuthorizationModel& model, const CheckRequest& request);

}  // namespace ods
