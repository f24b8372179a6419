#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ods/iri.hpp"
#include "ods/terms.hpp"
#include "ods/value.hpp"

namespace ods {

enum class PolicyKind { Set, Offer, Agreement };
enum class Operand { DateTime, Purpose, Count };
enum class Operator { Eq, Lt, Lteq, Gt, Gteq, IsAnyOf };

const char* to_string(PolicyKind kind);
const char* to_string(Operand operand);
const char* to_string(Operator op);
std::optional<PolicyKind> policy_kind_from(std::string_view text);
std::optional<Operand> operand_from(std::string_view text);
std::optional<Operator> operator_from(std::string_view text);

struct ActionTerm {
  Action term = Action::Use;
  Iri iri;

  static ActionTerm of(Action action);
  bool operator==(const ActionTerm&) const = default;
  auto operator<=>(const ActionTerm&) const = default;
};

struct PartyRef {
  enum class Kind { Concrete, Role };
  Kind kind = Kind::Concrete;
  Iri identity;                  // Concrete
  Role role = Role::Consumer;    // Role

  static PartyRef concrete(Iri iri) { return {Kind::Concrete, std::move(iri), Role::Consumer}; }
  static PartyRef of_role(Role role) { return {Kind::Role, {}, role}; }
  bool operator==(const PartyRef&) const = default;
};

/// leftOperand / operator / rightOperand triple. Well-formedness (operand vs
/// value type, operator applicability) is checked by profile validation, not
/// at construction, so that malformed documents still parse into something
/// the validator can point at.
struct Constraint {
  Operand left_operand = Operand::DateTime;
  Operator op = Operator::Eq;
  Value right_operand;
  std::optional<std::string> unit;

  bool operator==(const Constraint&) const = default;

  /// True when the operand/operator/value combination satisfies the type
  /// discipline (DateTime->timestamp, Purpose->text or list, Count->integer;
  /// IsAnyOf needs a list; ordering operators need DateTime or Count).
  bool well_formed() const;
};

struct Rule {
  ActionTerm action;
  Iri target;
  std::optional<PartyRef> assigner;
  std::optional<PartyRef> assignee;
  std::vector<Constraint> constraints;
  std::vector<Rule> duties;  // meaningful on permissions only

  bool operator==(const Rule&) const = default;
};

struct OdrlPolicy {
  Iri uid;
  PolicyKind kind = PolicyKind::Set;
  std::vector<Iri> profile;
  std::vector<Rule> permissions;
  std::vector<Rule> prohibitions;
  std::vector<Rule> obligations;

  bool operator==(const OdrlPolicy&) const = default;

  bool uses_ods_term() const;
  bool declares_ods_profile() const;
};

}  // namespace ods
