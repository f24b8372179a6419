#include "ods/policy_io.hpp"

#include <nlohmann/json.hpp>

#include "ods/error.hpp"

namespace ods {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
  throw OdsError(ErrorKind::MalformedDocument, what, path);
}

std::string require_string(const json& node, const std::string& path) {
  if (!node.is_string()) malformed(path, "expected a string");
  return node.get<std::string>();
}

Iri parse_iri(const json& node, const std::string& path) {
  auto text = require_string(node, path);
  if (!Iri::looks_like_iri(text)) malformed(path, "not an absolute IRI: '" + text + "'");
  return Iri(std::move(text));
}

ActionTerm parse_action(const json& node, const std::string& path) {
  auto text = require_string(node, path);
  const auto* entry = find_term(text);
  if (!entry || entry->parent_class != ParentClass::Action || !entry->action)
    throw OdsError(ErrorKind::UnknownTerm, "'" + text + "' is not a known action term", path);
  return ActionTerm{*entry->action, entry->iri};
}

PartyRef parse_party(const json& node, const std::string& path) {
  auto text = require_string(node, path);
  if (const auto* entry = find_term(text)) {
    if (entry->parent_class != ParentClass::Party || !entry->role)
      throw OdsError(ErrorKind::UnknownTerm, "'" + text + "' is not a party term", path);
    return PartyRef::of_role(*entry->role);
  }
  if (text.starts_with("ods:") || text.starts_with("odrl:"))
    throw OdsError(ErrorKind::UnknownTerm, "unknown party term '" + text + "'", path);
  if (!Iri::looks_like_iri(text)) malformed(path, "party is neither a role term nor an IRI");
  return PartyRef::concrete(Iri(std::move(text)));
}

void warn_unknown_keys(const json& object, std::initializer_list<std::string_view> known,
                       const std::string& path, std::vector<Diagnostic>& diagnostics) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    bool found = false;
    for (auto k : known)
      if (key == k) { found = true; break; }
    if (!found)
      diagnostics.push_back({Severity::Warning, "ODS104", "unknown key '" + key + "' ignored",
                             path + "/" + key});
  }
}

Value parse_right_operand(const json& node, Operand operand, const std::string& path) {
  if (node.is_string()) {
    auto text = node.get<std::string>();
    if (operand == Operand::DateTime) {
      if (auto ts = parse_rfc3339(text)) return Value::timestamp(*ts);
    }
    return Value::str(std::move(text));
  }
  if (node.is_number_integer()) return Value::integer(node.get<std::int64_t>());
  if (node.is_array()) {
    std::vector<std::string> items;
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (!node[i].is_string()) malformed(path + "/" + std::to_string(i), "expected a string");
      items.push_back(node[i].get<std::string>());
    }
    return Value::strings(std::move(items));
  }
  malformed(path, "rightOperand must be a string, integer or string list");
}

Constraint parse_constraint(const json& node, const std::string& path,
                            std::vector<Diagnostic>& diagnostics) {
  if (!node.is_object()) malformed(path, "constraint must be an object");
  warn_unknown_keys(node, {"leftOperand", "operator", "rightOperand", "unit"}, path, diagnostics);
  Constraint constraint;
  if (!node.contains("leftOperand"))
    throw OdsError(ErrorKind::MissingRequired, "constraint without leftOperand", path);
  auto operand_text = require_string(node.at("leftOperand"), path + "/leftOperand");
  auto operand = operand_from(operand_text);
  if (!operand)
    throw OdsError(ErrorKind::UnknownTerm, "unknown left operand '" + operand_text + "'",
                   path + "/leftOperand");
  constraint.left_operand = *operand;
  if (!node.contains("operator"))
    throw OdsError(ErrorKind::MissingRequired, "constraint without operator", path);
  auto op_text = require_string(node.at("operator"), path + "/operator");
  auto op = operator_from(op_text);
  if (!op)
    throw OdsError(ErrorKind::UnknownTerm, "unknown operator '" + op_text + "'",
                   path + "/operator");
  constraint.op = *op;
  if (!node.contains("rightOperand"))
    throw OdsError(ErrorKind::MissingRequired, "constraint without rightOperand", path);
  constraint.right_operand =
      parse_right_operand(node.at("rightOperand"), constraint.left_operand, path + "/rightOperand");
  if (node.contains("unit"))
    constraint.unit = require_string(node.at("unit"), path + "/unit");
  return constraint;
}

Rule parse_rule(const json& node, const std::string& path, std::vector<Diagnostic>& diagnostics) {
  if (!node.is_object()) malformed(path, "rule must be an object");
  warn_unknown_keys(node, {"action", "target", "assigner", "assignee", "constraint", "duty"}, path,
                    diagnostics);
  Rule rule;
  if (!node.contains("action"))
    throw OdsError(ErrorKind::MissingRequired, "rule without action", path + "/action");
  rule.action = parse_action(node.at("action"), path + "/action");
  if (!node.contains("target"))
    throw OdsError(ErrorKind::MissingRequired, "rule without target", path + "/target");
  rule.target = parse_iri(node.at("target"), path + "/target");
  if (node.contains("assigner"))
    rule.assigner = parse_party(node.at("assigner"), path + "/assigner");
  if (node.contains("assignee"))
    rule.assignee = parse_party(node.at("assignee"), path + "/assignee");
  if (node.contains("constraint")) {
    const auto& list = node.at("constraint");
    if (!list.is_array()) malformed(path + "/constraint", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i)
      rule.constraints.push_back(
          parse_constraint(list[i], path + "/constraint/" + std::to_string(i), diagnostics));
  }
  if (node.contains("duty")) {
    const auto& list = node.at("duty");
    if (!list.is_array()) malformed(path + "/duty", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i)
      rule.duties.push_back(parse_rule(list[i], path + "/duty/" + std::to_string(i), diagnostics));
  }
  return rule;
}

std::vector<Rule> parse_rule_list(const json& document, const char* key,
                                  std::vector<Diagnostic>& diagnostics) {
  std::vector<Rule> rules;
  if (!document.contains(key)) return rules;
  const auto& list = document.at(key);
  std::string base = std::string("/") + key;
  if (!list.is_array()) malformed(base, "expected a list of rules");
  for (std::size_t i = 0; i < list.size(); ++i)
    rules.push_back(parse_rule(list[i], base + "/" + std::to_string(i), diagnostics));
  return rules;
}

}  // namespace

ParseResult parse_policy(std::string_view document) {
  json root = json::parse(document, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw OdsError(ErrorKind::MalformedDocument, "document is not a structured-text object");

  ParseResult result;
  warn_unknown_keys(root,
                    {"@context", "@type", "uid", "profile", "permission", "prohibition",
                     "obligation"},
                    "", result.diagnostics);

  if (!root.contains("uid"))
    throw OdsError(ErrorKind::MissingRequired, "policy without uid", "/uid");
  result.policy.uid = parse_iri(root.at("uid"), "/uid");

  if (root.contains("@type")) {
    auto kind_text = require_string(root.at("@type"), "/@type");
    auto kind = policy_kind_from(kind_text);
    if (!kind) malformed("/@type", "unknown policy type '" + kind_text + "'");
    result.policy.kind = *kind;
  }

  if (root.contains("profile")) {
    const auto& profile = root.at("profile");
    if (profile.is_string()) {
      result.policy.profile.push_back(parse_iri(profile, "/profile"));
    } else if (profile.is_array()) {
      for (std::size_t i = 0; i < profile.size(); ++i)
        result.policy.profile.push_back(parse_iri(profile[i], "/profile/" + std::to_string(i)));
    } else {
      malformed("/profile", "expected an IRI or a list of IRIs");
    }
  }

  result.policy.permissions = parse_rule_list(root, "permission", result.diagnostics);
  result.policy.prohibitions = parse_rule_list(root, "prohibition", result.diagnostics);
  result.policy.obligations = parse_rule_list(root, "obligation", result.diagnostics);

  if (result.policy.permissions.empty() && result.policy.prohibitions.empty() &&
      result.policy.obligations.empty())
    throw OdsError(ErrorKind::MissingRequired, "policy has no rules", "");

  sort_diagnostics(result.diagnostics);
  return result;
}

namespace {

ordered_json render_party(const PartyRef& party) {
  if (party.kind == PartyRef::Kind::Role) return entry_for(party.role).compact;
  return party.identity.text();
}

ordered_json render_value(const Value& value) {
  switch (value.type) {
    case ValueType::Timestamp: return format_rfc3339(value.number);
    case ValueType::Integer: return value.number;
    case ValueType::Text: return value.text;
    case ValueType::TextList: return value.list;
  }
  return nullptr;
}

ordered_json render_constraint(const Constraint& constraint) {
  ordered_json out;
  out["leftOperand"] = to_string(constraint.left_operand);
  out["operator"] = to_string(constraint.op);
  out["rightOperand"] = render_value(constraint.right_operand);
  if (constraint.unit) out["unit"] = *constraint.unit;
  return out;
}

ordered_json render_rule(const Rule& rule) {
  ordered_json out;
  out["action"] = entry_for(rule.action.term).compact;
  out["target"] = rule.target.text();
  if (rule.assigner) out["assigner"] = render_party(*rule.assigner);
  if (rule.assignee) out["assignee"] = render_party(*rule.assignee);
  if (!rule.constraints.empty()) {
    auto& list = out["constraint"] = ordered_json::array();
    for (const auto& constraint : rule.constraints) list.push_back(render_constraint(constraint));
  }
  if (!rule.duties.empty()) {
    auto& list = out["duty"] = ordered_json::array();
    for (const auto& duty : rule.duties) list.push_back(render_rule(duty));
  }
  return out;
}

}  // namespace

std::string serialize_policy(const OdrlPolicy& policy) {
  ordered_json out;
  out["@context"] = {{"odrl", std::string(kOdrlNamespace)}, {"ods", std::string(kOdsNamespace)}};
  out["@type"] = to_string(policy.kind);
  out["uid"] = policy.uid.text();
  if (!policy.profile.empty()) {
    auto& list = out["profile"] = ordered_json::array();
    for (const auto& iri : policy.profile) list.push_back(iri.text());
  }
  const std::pair<const char*, const std::vector<Rule>*> sections[] = {
      {"permission", &policy.permissions},
      {"prohibition", &policy.prohibitions},
      {"obligation", &policy.obligations},
  };
  for (const auto& [key, rules] : sections) {
    if (rules->empty()) continue;
    auto& list = out[key] = ordered_json::array();
    for (const auto& rule : *rules) list.push_back(render_rule(rule));
  }
  return out.dump(2) + "\n";
}

}  // namespace ods
