#include "ods/validate.hpp"

#include "ods/error.hpp"
#include "ods/policy_io.hpp"

namespace ods {

namespace {

bool has_temporal_or_count(const Rule& rule) {
  for (const auto& constraint : rule.constraints)
    if (constraint.left_operand == Operand::DateTime || constraint.left_operand == Operand::Count)
      return true;
  return false;
}

void check_constraints(const Rule& rule, const std::string& path,
                       std::vector<Diagnostic>& out) {
  for (std::size_t i = 0; i < rule.constraints.size(); ++i) {
    const auto& constraint = rule.constraints[i];
    if (!constraint.well_formed())
      out.push_back({Severity::Error, "ODS003",
                     std::string("operand '") + to_string(constraint.left_operand) +
                         "' does not admit operator '" + to_string(constraint.op) +
                         "' with a " + to_string(constraint.right_operand.type) + " value",
                     path + "/constraint/" + std::to_string(i)});
  }
}

void check_rule(const OdrlPolicy& policy, const Rule& rule, const std::string& path,
                bool is_permission, bool is_duty, std::vector<Diagnostic>& out) {
  if (policy.kind == PolicyKind::Agreement && !is_duty) {
    if (!rule.assignee)
      out.push_back({Severity::Error, "ODS001", "agreement rule has no assignee",
                     path + "/assignee"});
    if (!rule.assigner)
      out.push_back({Severity::Error, "ODS001", "agreement rule has no assigner",
                     path + "/assigner"});
    if (rule.assigner && rule.assigner->kind == PartyRef::Kind::Role)
      out.push_back({Severity::Error, "ODS005",
                     "agreement assigner must be a concrete identity, not a role",
                     path + "/assigner"});
  }
  if (!is_permission && !rule.duties.empty())
    out.push_back({Severity::Error, "ODS004", "duties are only allowed on permissions",
                   path + "/duty"});
  check_constraints(rule, path, out);
  if (rule.action.term == Action::Retention && !has_temporal_or_count(rule))
    out.push_back({Severity::Warning, "ODS102",
                   "retention rule carries no temporal or count constraint", path});
  if (is_permission && !is_duty) {
    for (const auto& [party, field] :
         {std::pair{&rule.assignee, "/assignee"}, std::pair{&rule.assigner, "/assigner"}}) {
      if (*party && (*party)->kind == PartyRef::Kind::Role && (*party)->role == Role::Monitor)
        out.push_back({Severity::Warning, "ODS103",
                       "monitor parties oversee compliance and are not expected on permissions",
                       path + field});
    }
  }
  for (std::size_t i = 0; i < rule.duties.size(); ++i)
    check_rule(policy, rule.duties[i], path + "/duty/" + std::to_string(i),
               /*is_permission=*/false, /*is_duty=*/true, out);
}

}  // namespace

std::vector<Diagnostic> validate(const OdrlPolicy& policy) {
  std::vector<Diagnostic> out;
  if (policy.uses_ods_term() && !policy.declares_ods_profile())
    out.push_back({Severity::Warning, "ODS101",
                   "profile terms used but the profile IRI is not declared", "/profile"});
  const std::tuple<const char*, const std::vector<Rule>*, bool> sections[] = {
      {"/permission/", &policy.permissions, true},
      {"/prohibition/", &policy.prohibitions, false},
      {"/obligation/", &policy.obligations, false},
  };
  for (const auto& [prefix, rules, is_permission] : sections)
    for (std::size_t i = 0; i < rules->size(); ++i)
      check_rule(policy, (*rules)[i], prefix + std::to_string(i), is_permission,
                 /*is_duty=*/false, out);
  sort_diagnostics(out);
  return out;
}

std::vector<Diagnostic> validate_document(std::string_view document) {
  ParseResult parsed;
  try {
    parsed = parse_policy(document);
  } catch (const OdsError& e) {
    if (e.kind() == ErrorKind::UnknownTerm)
      return {{Severity::Error, "ODS002", e.message(), e.path()}};
    throw;
  }
  auto out = parsed.diagnostics;
  auto profile = validate(parsed.policy);
  out.insert(out.end(), profile.begin(), profile.end());
  sort_diagnostics(out);
  return out;
}

}  // namespace ods
