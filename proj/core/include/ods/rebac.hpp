#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ods/diagnostics.hpp"
#include "ods/policy.hpp"
#include "ods/value.hpp"

namespace ods {

inline constexpr std::string_view kSchemaVersion = "1.1";
inline constexpr int kMaxRewriteDepth = 10;

/// Userset-rewrite tree. Union/Intersection carry their children;
/// Exclusion carries exactly [base, subtract].
struct RewriteTree {
  enum class Kind { Direct, ComputedUserset, TupleToUserset, Union, Intersection, Exclusion };

  Kind kind = Kind::Direct;
  std::string relation;           // ComputedUserset target; TupleToUserset computed relation
  std::string tupleset_relation;  // TupleToUserset only
  std::vector<RewriteTree> children;

  static RewriteTree direct() { return {}; }
  static RewriteTree computed(std::string relation) {
    return {Kind::ComputedUserset, std::move(relation), {}, {}};
  }
  static RewriteTree tuple_to_userset(std::string tupleset, std::string computed) {
    return {Kind::TupleToUserset, std::move(computed), std::move(tupleset), {}};
  }
  static RewriteTree union_of(std::vector<RewriteTree> children);        // collapses singletons
  static RewriteTree intersection_of(std::vector<RewriteTree> children); // collapses singletons
  static RewriteTree exclusion(RewriteTree base, RewriteTree subtract);

  int depth() const;
  bool contains_direct() const;

  bool operator==(const RewriteTree&) const = default;
};

struct AssignableUserType {
  std::string type;
  std::optional<std::string> relation;   // userset subjects, e.g. group#member
  std::optional<std::string> condition;  // condition required on such tuples

  bool operator==(const AssignableUserType&) const = default;
  auto operator<=>(const AssignableUserType&) const = default;
};

/// Named condition compiled from a policy constraint. The predicate is
/// evaluated natively; the interchange expression string is a rendering of
/// it, never interpreted at check time.
struct ConditionDef {
  std::string name;
  std::map<std::string, ValueType> parameters;
  Constraint predicate;

  bool operator==(const ConditionDef&) const = default;
};

/// Context parameter a constraint operand reads at evaluation time.
std::string_view condition_parameter(Operand operand);
ValueType condition_parameter_type(Operand operand);

struct TypeDefinition {
  std::string name;
  std::map<std::string, RewriteTree> relations;
  std::map<std::string, std::vector<AssignableUserType>> assignable_user_types;

  bool operator==(const TypeDefinition&) const = default;
};

struct AuthorizationModel {
  std::string schema_version{kSchemaVersion};
  std::vector<TypeDefinition> type_definitions;  // sorted by name
  std::map<std::string, ConditionDef> conditions;

  const TypeDefinition* find_type(std::string_view name) const;
  const RewriteTree* find_relation(std::string_view type, std::string_view relation) const;

  bool operator==(const AuthorizationModel&) const = default;
};

/// Empty result iff every model invariant holds.
std::vector<Diagnostic> validate_model(const AuthorizationModel& model);

struct ObjectRef {
  std::string type;
  std::string id;

  std::string render() const { return type + ":" + id; }
  static ObjectRef parse(std::string_view text);

  bool operator==(const ObjectRef&) const = default;
  auto operator<=>(const ObjectRef&) const = default;
};

struct UserRef {
  ObjectRef object;
  std::optional<std::string> userset_relation;  // set -> "type:id#relation"

  static UserRef direct(ObjectRef object) { return {std::move(object), std::nullopt}; }
  static UserRef userset(ObjectRef object, std::string relation) {
    return {std::move(object), std::move(relation)};
  }
  bool is_direct() const { return !userset_relation.has_value(); }

  std::string render() const;
  static UserRef parse(std::string_view text);

  bool operator==(const UserRef&) const = default;
  auto operator<=>(const UserRef&) const = default;
};

struct ConditionRef {
  std::string name;
  std::map<std::string, Value> context;

  bool operator==(const ConditionRef&) const = default;
  auto operator<=>(const ConditionRef&) const = default;
};

struct RelationshipTuple {
  UserRef user;
  std::string relation;
  ObjectRef object;
  std::optional<ConditionRef> condition;

  /// Canonical line: `user relation object [condition-json]`.
  std::string render() const;
  static RelationshipTuple parse(std::string_view line);

  bool operator==(const RelationshipTuple&) const = default;
  auto operator<=>(const RelationshipTuple&) const = default;
};

}  // namespace ods
