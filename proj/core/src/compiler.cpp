#include "ods/compiler.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "ods/error.hpp"
#include "ods/validate.hpp"

namespace ods {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kAssetType = "asset";
constexpr const char* kUserType = "user";

std::string hash8(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08llx",
                static_cast<unsigned long long>(h & 0xffffffffull));
  return buf;
}

struct ActionPlan {
  std::vector<Role> grant_roles;
  std::vector<Role> deny_roles;
  std::vector<std::string> grant_conditions;
  std::vector<std::string> deny_conditions;
};

struct Builder {
  CompilationResult result;
  std::map<std::string, ActionPlan> actions;  // keyed by action_name

  std::string derive_id(const std::string& type, const Iri& iri, const std::string& path) {
    std::string id = iri.last_segment();
    if (id.find(':') != std::string::npos || id.find('#') != std::string::npos)
      throw OdsError(ErrorKind::MalformedDocument, "IRI segment unusable as id", path);
    const std::string key = type + ":" + id;
    auto [it, inserted] = result.iri_map.emplace(key, iri);
    if (!inserted && !(it->second == iri))
      throw OdsError(ErrorKind::IdCollision,
                     "'" + it->second.text() + "' and '" + iri.text() +
                         "' both derive id '" + key + "'",
                     path);
    return id;
  }

  std::optional<ConditionRef> rule_condition(const Rule& rule, const std::string& path) {
    std::vector<const Constraint*> compilable;
    for (const auto& constraint : rule.constraints) compilable.push_back(&constraint);
    if (compilable.empty()) return std::nullopt;
    if (compilable.size() > 1)
      throw OdsError(ErrorKind::UnsupportedConstruct,
                     "more than one constraint on a single rule has no mapping",
                     path + "/constraint");
    try {
      auto cond = compile_constraint(*compilable.front());
      result.model.conditions.emplace(cond.name, cond);
      return ConditionRef{cond.name, {}};
    } catch (const OdsError& e) {
      if (e.path().empty())
        throw OdsError(e.kind(), e.message(), path + "/constraint/0");
      throw;
    }
  }

  void add_tuple(RelationshipTuple tuple) { result.tuples.push_back(std::move(tuple)); }

  void lower_access_rule(const OdrlPolicy& policy, const Rule& rule, const std::string& path,
                         bool is_permission) {
    const std::string action(action_name(rule.action.term));
    auto& plan = actions[action];
    const std::string asset_id = derive_id(kAssetType, rule.target, path + "/target");
    const ObjectRef asset{kAssetType, asset_id};

    if (!rule.assignee)
      throw OdsError(ErrorKind::UnsupportedConstruct,
                     "rule without an assignee has no relationship mapping",
                     path + "/assignee");

    if (rule.assignee->kind == PartyRef::Kind::Role) {
      if (!rule.constraints.empty())
        throw OdsError(ErrorKind::UnsupportedConstruct,
                       "constraints on role-scoped rules are not supported",
                       path + "/constraint");
      auto& roles = is_permission ? plan.grant_roles : plan.deny_roles;
      if (std::find(roles.begin(), roles.end(), rule.assignee->role) == roles.end())
        roles.push_back(rule.assignee->role);
    } else {
      auto condition = rule_condition(rule, path);
      const std::string user_id =
          derive_id(kUserType, rule.assignee->identity, path + "/assignee");
      const std::string relation = action + (is_permission ? "_grant" : "_deny");
      if (condition) {
        auto& conds = is_permission ? plan.grant_conditions : plan.deny_conditions;
        if (std::find(conds.begin(), conds.end(), condition->name) == conds.end())
          conds.push_back(condition->name);
      }
      add_tuple({UserRef::direct({kUserType, user_id}), relation, asset, condition});
    }

    if (policy.kind == PolicyKind::Agreement && rule.assigner &&
        rule.assigner->kind == PartyRef::Kind::Concrete) {
      const std::string provider_id =
          derive_id(kUserType, rule.assigner->identity, path + "/assigner");
      add_tuple({UserRef::direct({kUserType, provider_id}), std::string(role_name(Role::Provider)),
                 asset, std::nullopt});
    }

    if (is_permission)
      for (std::size_t i = 0; i < rule.duties.size(); ++i)
        lower_duty(rule.duties[i], path + "/duty/" + std::to_string(i));
  }

  void lower_duty(const Rule& duty, const std::string& path) {
    ObligationRecord record;
    record.action = duty.action;
    record.target = duty.target;
    record.source_rule_path = path;
    derive_id(kAssetType, duty.target, path + "/target");  // keep the sidecar complete
    for (const auto& constraint : duty.constraints) {
      std::string key;
      switch (constraint.left_operand) {
        case Operand::DateTime: key = "deadline"; break;
        case Operand::Purpose: key = "purpose"; break;
        case Operand::Count: key = "count"; break;
      }
      std::string unique = key;
      for (int i = 2; record.parameters.contains(unique); ++i)
        unique = key + "_" + std::to_string(i);
      record.parameters.emplace(unique, constraint.right_operand);
    }
    result.obligations.push_back(std::move(record));
  }

  void finish() {
    TypeDefinition user;
    user.name = kUserType;

    TypeDefinition asset;
    asset.name = kAssetType;
    for (Role role : {Role::Consumer, Role::Provider, Role::Broker, Role::Monitor}) {
      asset.relations.emplace(role_name(role), RewriteTree::direct());
      asset.assignable_user_types.emplace(role_name(role),
                                          std::vector<AssignableUserType>{{kUserType, {}, {}}});
    }

    for (auto& [action, plan] : actions) {
      std::sort(plan.grant_roles.begin(), plan.grant_roles.end(),
                [](Role a, Role b) { return role_name(a) < role_name(b); });
      std::sort(plan.deny_roles.begin(), plan.deny_roles.end(),
                [](Role a, Role b) { return role_name(a) < role_name(b); });
      std::sort(plan.grant_conditions.begin(), plan.grant_conditions.end());
      std::sort(plan.deny_conditions.begin(), plan.deny_conditions.end());

      const std::string grant = action + "_grant";
      const std::string deny = action + "_deny";

      asset.relations.emplace(grant, RewriteTree::direct());
      std::vector<AssignableUserType> grant_meta{{kUserType, {}, {}}};
      for (const auto& cond : plan.grant_conditions)
        grant_meta.push_back({kUserType, {}, cond});
      asset.assignable_user_types.emplace(grant, std::move(grant_meta));

      std::vector<RewriteTree> deny_branches{RewriteTree::direct()};
      for (Role role : plan.deny_roles)
        deny_branches.push_back(RewriteTree::computed(std::string(role_name(role))));
      asset.relations.emplace(deny, RewriteTree::union_of(std::move(deny_branches)));
      std::vector<AssignableUserType> deny_meta{{kUserType, {}, {}}};
      for (const auto& cond : plan.deny_conditions)
        deny_meta.push_back({kUserType, {}, cond});
      asset.assignable_user_types.emplace(deny, std::move(deny_meta));

      std::vector<RewriteTree> base_branches{RewriteTree::computed(grant)};
      for (Role role : plan.grant_roles)
        base_branches.push_back(RewriteTree::computed(std::string(role_name(role))));
      asset.relations.emplace("can_" + action,
                              RewriteTree::exclusion(
                                  RewriteTree::union_of(std::move(base_branches)),
                                  RewriteTree::computed(deny)));
    }

    result.model.type_definitions.push_back(std::move(asset));
    result.model.type_definitions.push_back(std::move(user));
    canonicalize();
  }

  void canonicalize() {
    std::sort(result.model.type_definitions.begin(), result.model.type_definitions.end(),
              [](const TypeDefinition& a, const TypeDefinition& b) { return a.name < b.name; });
    std::sort(result.tuples.begin(), result.tuples.end());
    result.tuples.erase(std::unique(result.tuples.begin(), result.tuples.end()),
                        result.tuples.end());
    std::sort(result.obligations.begin(), result.obligations.end());
    sort_diagnostics(result.diagnostics);
  }
};

}  // namespace

ConditionDef compile_constraint(const Constraint& constraint, std::string_view role_hint) {
  if (!constraint.well_formed())
    throw OdsError(ErrorKind::UnsupportedConstruct, "malformed constraint has no mapping");
  if (constraint.left_operand == Operand::Count)
    throw OdsError(ErrorKind::UnsupportedConstruct,
                   "count constraints need a stateful usage-control runtime");
  ConditionDef cond;
  cond.predicate = constraint;
  cond.predicate.unit.reset();  // units have no evaluation semantics here
  std::string canonical = std::string(to_string(constraint.left_operand)) + "|" +
                          to_string(constraint.op) + "|" + constraint.right_operand.render();
  if (!role_hint.empty()) canonical += "|" + std::string(role_hint);
  cond.name = std::string("cond_") + to_string(constraint.left_operand) + "_" +
              to_string(constraint.op) + "_" + hash8(canonical);
  // condition names are lowercase identifiers
  std::transform(cond.name.begin(), cond.name.end(), cond.name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(cond.name.begin(), cond.name.end(), '-', '_');
  cond.parameters.emplace(condition_parameter(constraint.left_operand),
                          condition_parameter_type(constraint.left_operand));
  return cond;
}

CompilationResult compile_policy(const OdrlPolicy& policy) {
  auto findings = validate(policy);
  if (has_errors(findings)) {
    std::string detail;
    for (const auto& d : findings)
      if (d.severity == Severity::Error) detail += (detail.empty() ? "" : "; ") + render(d);
    throw OdsError(ErrorKind::ValidationFailed, detail);
  }

  Builder builder;
  builder.result.diagnostics = findings;  // warnings only at this point
  for (std::size_t i = 0; i < policy.permissions.size(); ++i)
    builder.lower_access_rule(policy, policy.permissions[i],
                              "/permission/" + std::to_string(i), true);
  for (std::size_t i = 0; i < policy.prohibitions.size(); ++i)
    builder.lower_access_rule(policy, policy.prohibitions[i],
                              "/prohibition/" + std::to_string(i), false);
  for (std::size_t i = 0; i < policy.obligations.size(); ++i)
    builder.lower_duty(policy.obligations[i], "/obligation/" + std::to_string(i));
  builder.finish();

  auto model_findings = validate_model(builder.result.model);
  if (has_errors(model_findings))
    throw OdsError(ErrorKind::InvalidModel,
                   "compiler produced an invalid model: " + render(model_findings[0]));
  return std::move(builder.result);
}

CompilationResult compile_policy_set(std::span<const OdrlPolicy> policies) {
  if (policies.empty())
    throw OdsError(ErrorKind::MissingRequired, "no policies to compile");
  CompilationResult merged = compile_policy(policies.front());
  for (std::size_t p = 1; p < policies.size(); ++p) {
    CompilationResult next = compile_policy(policies[p]);
    for (auto& td : next.model.type_definitions) {
      auto it = std::find_if(merged.model.type_definitions.begin(),
                             merged.model.type_definitions.end(),
                             [&](const TypeDefinition& t) { return t.name == td.name; });
      if (it == merged.model.type_definitions.end()) {
        merged.model.type_definitions.push_back(std::move(td));
        continue;
      }
      for (auto& [rel, tree] : td.relations) {
        auto rit = it->relations.find(rel);
        if (rit == it->relations.end()) {
          it->relations.emplace(rel, std::move(tree));
        } else if (!(rit->second == tree)) {
          throw OdsError(ErrorKind::MergeConflict,
                         "conflicting rewrite trees for relation '" + td.name + "." + rel + "'");
        }
      }
      for (auto& [rel, entries] : td.assignable_user_types) {
        auto& target = it->assignable_user_types[rel];
        target.insert(target.end(), entries.begin(), entries.end());
        std::sort(target.begin(), target.end());
        target.erase(std::unique(target.begin(), target.end()), target.end());
      }
    }
    for (auto& [name, cond] : next.model.conditions) {
      auto [cit, inserted] = merged.model.conditions.emplace(name, cond);
      if (!inserted && !(cit->second == cond))
        throw OdsError(ErrorKind::MergeConflict, "conflicting condition '" + name + "'");
    }
    for (auto& [key, iri] : next.iri_map) {
      auto [iit, inserted] = merged.iri_map.emplace(key, iri);
      if (!inserted && !(iit->second == iri))
        throw OdsError(ErrorKind::IdCollision, "'" + iit->second.text() + "' and '" +
                                                   iri.text() + "' both derive id '" + key + "'");
    }
    merged.tuples.insert(merged.tuples.end(), next.tuples.begin(), next.tuples.end());
    merged.obligations.insert(merged.obligations.end(), next.obligations.begin(),
                              next.obligations.end());
    merged.diagnostics.insert(merged.diagnostics.end(), next.diagnostics.begin(),
                              next.diagnostics.end());
  }
  std::sort(merged.model.type_definitions.begin(), merged.model.type_definitions.end(),
            [](const TypeDefinition& a, const TypeDefinition& b) { return a.name < b.name; });
  std::sort(merged.tuples.begin(), merged.tuples.end());
  merged.tuples.erase(std::unique(merged.tuples.begin(), merged.tuples.end()),
                      merged.tuples.end());
  std::sort(merged.obligations.begin(), merged.obligations.end());
  merged.obligations.erase(std::unique(merged.obligations.begin(), merged.obligations.end()),
                           merged.obligations.end());
  sort_diagnostics(merged.diagnostics);
  merged.diagnostics.erase(std::unique(merged.diagnostics.begin(), merged.diagnostics.end()),
                           merged.diagnostics.end());

  auto findings = validate_model(merged.model);
  if (has_errors(findings))
    throw OdsError(ErrorKind::MergeConflict, "merged model fails validation: " +
                                                 render(findings[0]));
  return merged;
}

std::string render_tuple_file(const std::vector<RelationshipTuple>& tuples,
                              const std::map<std::string, Iri>& iri_map) {
  json iris = json::object();
  for (const auto& [key, iri] : iri_map) iris[key] = iri.text();
  std::string out = "# iris " + iris.dump() + "\n";
  for (const auto& tuple : tuples) out += tuple.render() + "\n";
  return out;
}

std::vector<RelationshipTuple> parse_tuple_file(std::string_view document) {
  std::vector<RelationshipTuple> tuples;
  std::size_t pos = 0;
  while (pos < document.size()) {
    auto end = document.find('\n', pos);
    if (end == std::string_view::npos) end = document.size();
    auto line = document.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    tuples.push_back(RelationshipTuple::parse(line));
  }
  return tuples;
}

std::string render_obligations(const std::vector<ObligationRecord>& obligations) {
  std::string out;
  for (const auto& record : obligations) {
    ordered_json node;
    node["action"] = entry_for(record.action.term).compact;
    node["target"] = record.target.text();
    auto& params = node["parameters"] = ordered_json::object();
    for (const auto& [key, value] : record.parameters) {
      switch (value.type) {
        case ValueType::Timestamp: params[key] = format_rfc3339(value.number); break;
        case ValueType::Integer: params[key] = value.number; break;
        case ValueType::Text: params[key] = value.text; break;
        case ValueType::TextList: params[key] = value.list; break;
      }
    }
    node["source_rule_path"] = record.source_rule_path;
    out += node.dump() + "\n";
  }
  return out;
}

}  // namespace ods
