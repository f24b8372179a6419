#include "ods/policy.hpp"

namespace ods {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Set: return "Set";
    case PolicyKind::Offer: return "Offer";
    case PolicyKind::Agreement: return "Agreement";
  }
  return "?";
}

const char* to_string(Operand operand) {
  switch (operand) {
    case Operand::DateTime: return "dateTime";
    case Operand::Purpose: return "purpose";
    case Operand::Count: return "count";
  }
  return "?";
}

const char* to_string(Operator op) {
  switch (op) {
    case Operator::Eq: return "eq";
    case Operator::Lt: return "lt";
    case Operator::Lteq: return "lteq";
    case Operator::Gt: return "gt";
    case Operator::Gteq: return "gteq";
    case Operator::IsAnyOf: return "isAnyOf";
  }
  return "?";
}

std::optional<PolicyKind> policy_kind_from(std::string_view text) {
  if (text == "Set") return PolicyKind::Set;
  if (text == "Offer") return PolicyKind::Offer;
  if (text == "Agreement") return PolicyKind::Agreement;
  return std::nullopt;
}

std::optional<Operand> operand_from(std::string_view text) {
  if (text == "dateTime") return Operand::DateTime;
  if (text == "purpose") return Operand::Purpose;
  if (text == "count") return Operand::Count;
  return std::nullopt;
}

std::optional<Operator> operator_from(std::string_view text) {
  if (text == "eq") return Operator::Eq;
  if (text == "lt") return Operator::Lt;
  if (text == "lteq") return Operator::Lteq;
  if (text == "gt") return Operator::Gt;
  if (text == "gteq") return Operator::Gteq;
  if (text == "isAnyOf") return Operator::IsAnyOf;
  return std::nullopt;
}

ActionTerm ActionTerm::of(Action action) { return {action, entry_for(action).iri}; }

bool Constraint::well_formed() const {
  switch (left_operand) {
    case Operand::DateTime:
      if (right_operand.type != ValueType::Timestamp) return false;
      break;
    case Operand::Purpose:
      if (right_operand.type != ValueType::Text && right_operand.type != ValueType::TextList)
        return false;
      break;
    case Operand::Count:
      if (right_operand.type != ValueType::Integer || right_operand.number < 0) return false;
      break;
  }
  if (op == Operator::IsAnyOf) return right_operand.type == ValueType::TextList;
  if (op == Operator::Lt || op == Operator::Lteq || op == Operator::Gt || op == Operator::Gteq)
    return left_operand == Operand::DateTime || left_operand == Operand::Count;
  // Eq accepts any matching operand/value pair except bare lists
  return right_operand.type != ValueType::TextList;
}

namespace {

bool is_ods_action(Action action) {
  switch (action) {
    case Action::Train:
    case Action::Subscribe:
    case Action::RequestData:
    case Action::Retention:
    case Action::KillJob:
      return true;
    default:
      return false;
  }
}

bool rule_uses_ods(const Rule& rule) {
  if (is_ods_action(rule.action.term)) return true;
  if (rule.assigner && rule.assigner->kind == PartyRef::Kind::Role) return true;
  if (rule.assignee && rule.assignee->kind == PartyRef::Kind::Role) return true;
  for (const auto& duty : rule.duties)
    if (rule_uses_ods(duty)) return true;
  return false;
}

}  // namespace

bool OdrlPolicy::uses_ods_term() const {
  for (const auto* rules : {&permissions, &prohibitions, &obligations})
    for (const auto& rule : *rules)
      if (rule_uses_ods(rule)) return true;
  return false;
}

bool OdrlPolicy::declares_ods_profile() const {
  const Iri ods_iri{std::string(kOdsNamespace)};
  for (const auto& p : profile)
    if (p == ods_iri) return true;
  return false;
}

}  // namespace ods
