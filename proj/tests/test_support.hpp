#pragma once

// Shared plumbing for the test binaries: corpus access and random generators
// for policies, authorization models, tuples and check requests.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ods/check.hpp"
#include "ods/compiler.hpp"
#include "ods/policy.hpp"
#include "ods/rebac.hpp"

namespace testutil {

using Rng = std::mt19937_64;

inline std::filesystem::path corpus_dir() { return std::filesystem::path(ODS_CORPUS_DIR); }

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void spit(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::vector<std::filesystem::path> corpus_files(const char* subdir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir() / subdir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

inline int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

template <typename T>
inline const T& pick_one(Rng& rng, const std::vector<T>& pool) {
  return pool[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(pool.size()) - 1))];
}

// ---------------------------------------------------------------- policies

inline ods::Iri example_iri(const std::string& tail) {
  return ods::Iri("https://example.com/" + tail);
}

inline const std::vector<std::string>& party_pool() {
  static const std::vector<std::string> pool{"alice", "bob", "carol", "dave", "erin", "frank"};
  return pool;
}

inline const std::vector<std::string>& purpose_pool() {
  static const std::vector<std::string> pool{"research", "audit", "marketing", "resale"};
  return pool;
}

inline constexpr std::int64_t kAnchorTime = 1767225600;  // 2026-01-01T00:00:00Z

inline ods::Action random_action(Rng& rng) {
  static const ods::Action all[] = {
      ods::Action::Use,       ods::Action::Read,      ods::Action::Modify,
      ods::Action::Distribute, ods::Action::Delete,   ods::Action::Train,
      ods::Action::Subscribe, ods::Action::RequestData, ods::Action::Retention,
      ods::Action::KillJob};
  return all[pick(rng, 0, 9)];
}

inline ods::Role random_role(Rng& rng) {
  static const ods::Role all[] = {ods::Role::Consumer, ods::Role::Provider, ods::Role::Broker,
                                  ods::Role::Monitor};
  return all[pick(rng, 0, 3)];
}

inline ods::Operator random_ordering_op(Rng& rng) {
  static const ods::Operator ops[] = {ods::Operator::Eq, ods::Operator::Lt, ods::Operator::Lteq,
                                      ods::Operator::Gt, ods::Operator::Gteq};
  return ops[pick(rng, 0, 4)];
}

// Well-formed constraint of any operand; `allow_count` off restricts to the
// operands the compiler can map.
inline ods::Constraint gen_constraint(Rng& rng, bool allow_count = true) {
  ods::Constraint c;
  switch (pick(rng, 0, allow_count ? 3 : 2)) {
    case 0:
      c.left_operand = ods::Operand::DateTime;
      c.op = random_ordering_op(rng);
      c.right_operand = ods::Value::timestamp(kAnchorTime + 3600 * pick(rng, -100, 100));
      break;
    case 1:
      c.left_operand = ods::Operand::Purpose;
      c.op = ods::Operator::Eq;
      c.right_operand = ods::Value::str(pick_one(rng, purpose_pool()));
      break;
    case 2: {
      c.left_operand = ods::Operand::Purpose;
      c.op = ods::Operator::IsAnyOf;
      std::vector<std::string> items;
      int n = pick(rng, 1, 3);
      for (int i = 0; i < n; ++i) items.push_back(pick_one(rng, purpose_pool()));
      std::sort(items.begin(), items.end());
      items.erase(std::unique(items.begin(), items.end()), items.end());
      c.right_operand = ods::Value::strings(std::move(items));
      break;
    }
    default:
      c.left_operand = ods::Operand::Count;
      c.op = random_ordering_op(rng);
      c.right_operand = ods::Value::integer(pick(rng, 0, 20));
      break;
  }
  if (chance(rng, 0.1)) c.unit = "seconds";
  return c;
}

inline ods::PartyRef gen_party(Rng& rng, bool allow_role = true) {
  if (allow_role && chance(rng, 0.4)) return ods::PartyRef::of_role(random_role(rng));
  return ods::PartyRef::concrete(example_iri("party/" + pick_one(rng, party_pool())));
}

inline ods::Rule gen_rule(Rng& rng, bool is_permission, bool agreement) {
  ods::Rule rule;
  rule.action = ods::ActionTerm::of(random_action(rng));
  rule.target = example_iri("asset/ds" + std::to_string(pick(rng, 0, 5)));
  rule.assignee = gen_party(rng);
  if (agreement)
    rule.assigner = ods::PartyRef::concrete(example_iri("party/" + pick_one(rng, party_pool())));
  else if (chance(rng, 0.2))
    rule.assigner = gen_party(rng);
  int nconstraints = pick(rng, 0, 2);
  for (int i = 0; i < nconstraints; ++i) rule.constraints.push_back(gen_constraint(rng));
  if (is_permission && chance(rng, 0.3)) {
    ods::Rule duty;
    duty.action = ods::ActionTerm::of(ods::Action::Retention);
    duty.target = rule.target;
    ods::Constraint deadline;
    deadline.left_operand = ods::Operand::DateTime;
    deadline.op = ods::Operator::Lteq;
    deadline.right_operand = ods::Value::timestamp(kAnchorTime + 86400 * pick(rng, 1, 365));
    duty.constraints.push_back(deadline);
    rule.duties.push_back(std::move(duty));
  }
  return rule;
}

// Satisfies the type invariants; may still draw validation diagnostics.
// Intended for parse/serialize round-trips.
inline ods::OdrlPolicy gen_policy(Rng& rng) {
  ods::OdrlPolicy policy;
  policy.uid = example_iri("policy/p" + std::to_string(pick(rng, 0, 999999)));
  int kind = pick(rng, 0, 3);
  policy.kind = kind == 0   ? ods::PolicyKind::Agreement
                : kind == 1 ? ods::PolicyKind::Offer
                            : ods::PolicyKind::Set;
  const bool agreement = policy.kind == ods::PolicyKind::Agreement;
  policy.profile.push_back(ods::Iri(std::string(ods::kOdsNamespace)));
  int nperm = pick(rng, 1, 3);
  for (int i = 0; i < nperm; ++i) policy.permissions.push_back(gen_rule(rng, true, agreement));
  int nproh = pick(rng, 0, 2);
  for (int i = 0; i < nproh; ++i) policy.prohibitions.push_back(gen_rule(rng, false, agreement));
  if (!agreement && chance(rng, 0.3)) policy.obligations.push_back(gen_rule(rng, false, false));
  for (auto* rules : {&policy.prohibitions, &policy.obligations})
    for (auto& rule : *rules) rule.duties.clear();
  return policy;
}

// Passes validate() with zero Errors and hits no UnsupportedConstruct path.
inline ods::OdrlPolicy gen_compilable_policy(Rng& rng) {
  ods::OdrlPolicy policy;
  policy.uid = example_iri("policy/p" + std::to_string(pick(rng, 0, 999999)));
  policy.kind = chance(rng, 0.3) ? ods::PolicyKind::Agreement
                                 : (chance(rng, 0.5) ? ods::PolicyKind::Offer
                                                     : ods::PolicyKind::Set);
  const bool agreement = policy.kind == ods::PolicyKind::Agreement;
  policy.profile.push_back(ods::Iri(std::string(ods::kOdsNamespace)));

  auto gen = [&](bool is_permission) {
    ods::Rule rule = gen_rule(rng, is_permission, agreement);
    rule.constraints.clear();
    rule.duties.clear();
    if (rule.assignee->kind == ods::PartyRef::Kind::Concrete && chance(rng, 0.4))
      rule.constraints.push_back(gen_constraint(rng, /*allow_count=*/false));
    if (is_permission && chance(rng, 0.3)) {
      ods::Rule duty;
      duty.action = ods::ActionTerm::of(ods::Action::Retention);
      duty.target = rule.target;
      ods::Constraint deadline;
      deadline.left_operand = ods::Operand::DateTime;
      deadline.op = ods::Operator::Lteq;
      deadline.right_operand = ods::Value::timestamp(kAnchorTime + 86400 * pick(rng, 1, 365));
      duty.constraints.push_back(deadline);
      rule.duties.push_back(std::move(duty));
    }
    return rule;
  };

  int nperm = pick(rng, 1, 3);
  for (int i = 0; i < nperm; ++i) policy.permissions.push_back(gen(true));
  int nproh = pick(rng, 0, 2);
  for (int i = 0; i < nproh; ++i) policy.prohibitions.push_back(gen(false));
  return policy;
}

// ------------------------------------------------------- models and tuples

// Relations carry globally unique names and may only reference relations
// with a strictly smaller global index, so every model is acyclic and the
// iterated-fixpoint oracle terminates at the exact check semantics.
struct ModelBundle {
  ods::AuthorizationModel model;
  // (type, relation) pairs whose rewrite contains a Direct leaf.
  std::vector<std::pair<std::string, std::string>> assignable;
};

namespace detail {

inline ods::RewriteTree gen_tree(Rng& rng, int budget,
                                 const std::vector<std::string>& lower_same_type,
                                 const std::vector<std::string>& lower_anywhere) {
  const bool can_refer = !lower_same_type.empty();
  if (budget <= 1) {
    if (can_refer && chance(rng, 0.3))
      return ods::RewriteTree::computed(pick_one(rng, lower_same_type));
    return ods::RewriteTree::direct();
  }
  const int roll = pick(rng, 0, 99);
  if (roll < 40) return ods::RewriteTree::direct();
  if (roll < 55) {
    if (!can_refer) return ods::RewriteTree::direct();
    return ods::RewriteTree::computed(pick_one(rng, lower_same_type));
  }
  if (roll < 65) {
    if (!can_refer || lower_anywhere.empty()) return ods::RewriteTree::direct();
    return ods::RewriteTree::tuple_to_userset(pick_one(rng, lower_same_type),
                                              pick_one(rng, lower_anywhere));
  }
  if (roll < 80) {
    std::vector<ods::RewriteTree> children;
    int n = pick(rng, 2, 3);
    for (int i = 0; i < n; ++i)
      children.push_back(gen_tree(rng, budget - 1, lower_same_type, lower_anywhere));
    return {ods::RewriteTree::Kind::Union, {}, {}, std::move(children)};
  }
  if (roll < 90) {
    std::vector<ods::RewriteTree> children;
    int n = pick(rng, 2, 3);
    for (int i = 0; i < n; ++i)
      children.push_back(gen_tree(rng, budget - 1, lower_same_type, lower_anywhere));
    return {ods::RewriteTree::Kind::Intersection, {}, {}, std::move(children)};
  }
  return ods::RewriteTree::exclusion(gen_tree(rng, budget - 1, lower_same_type, lower_anywhere),
                                     gen_tree(rng, budget - 1, lower_same_type, lower_anywhere));
}

}  // namespace detail

inline ods::ConditionDef gen_condition(Rng& rng, const std::string& name) {
  ods::ConditionDef cond;
  cond.name = name;
  cond.predicate = gen_constraint(rng);
  cond.predicate.unit.reset();
  cond.parameters.emplace(ods::condition_parameter(cond.predicate.left_operand),
                          ods::condition_parameter_type(cond.predicate.left_operand));
  return cond;
}

inline ModelBundle gen_model(Rng& rng, int max_types = 5, int max_relations = 4) {
  ModelBundle bundle;
  auto& model = bundle.model;

  int nconds = pick(rng, 0, 2);
  for (int i = 0; i < nconds; ++i) {
    std::string name = "cond_" + std::string(1, static_cast<char>('a' + i));
    model.conditions.emplace(name, gen_condition(rng, name));
  }
  std::vector<std::string> condition_names;
  for (const auto& [name, cond] : model.conditions) condition_names.push_back(name);

  const int ntypes = pick(rng, 1, max_types);
  int next_relation = 0;
  std::vector<std::string> all_relations;  // global creation order

  for (int t = 0; t < ntypes; ++t) {
    ods::TypeDefinition td;
    td.name = std::string("t") + static_cast<char>('a' + t);
    std::vector<std::string> local;
    const int nrel = pick(rng, 1, max_relations);
    for (int r = 0; r < nrel; ++r) {
      std::string name = "rel" + std::to_string(next_relation++);
      auto tree = detail::gen_tree(rng, 4, local, all_relations);
      if (tree.contains_direct()) {
        std::vector<ods::AssignableUserType> entries{{"user", {}, {}}};
        if (!bundle.assignable.empty() && chance(rng, 0.3)) {
          const auto& [styp, srel] = pick_one(rng, bundle.assignable);
          entries.push_back({styp, srel, {}});
        }
        if (!condition_names.empty() && chance(rng, 0.3))
          entries.push_back({"user", {}, pick_one(rng, condition_names)});
        std::sort(entries.begin(), entries.end());
        entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
        td.assignable_user_types.emplace(name, std::move(entries));
        bundle.assignable.emplace_back(td.name, name);
      }
      td.relations.emplace(name, std::move(tree));
      local.push_back(name);
      all_relations.push_back(name);
    }
    model.type_definitions.push_back(std::move(td));
  }
  ods::TypeDefinition user;
  user.name = "user";
  model.type_definitions.push_back(std::move(user));
  std::sort(model.type_definitions.begin(), model.type_definitions.end(),
            [](const ods::TypeDefinition& a, const ods::TypeDefinition& b) {
              return a.name < b.name;
            });
  return bundle;
}

inline std::map<std::string, ods::Value> gen_context(Rng& rng) {
  std::map<std::string, ods::Value> context;
  if (chance(rng, 0.5))
    context.emplace("current_time",
                    ods::Value::timestamp(kAnchorTime + 3600 * pick(rng, -100, 100)));
  if (chance(rng, 0.5)) context.emplace("purpose", ods::Value::str(pick_one(rng, purpose_pool())));
  if (chance(rng, 0.3)) context.emplace("count", ods::Value::integer(pick(rng, 0, 20)));
  return context;
}

inline ods::RelationshipTuple gen_tuple(Rng& rng, const ModelBundle& bundle) {
  const auto& [type, relation] = pick_one(rng, bundle.assignable);
  ods::RelationshipTuple tuple;
  tuple.relation = relation;
  tuple.object = {type, "o" + std::to_string(pick(rng, 0, 4))};
  const auto* td = bundle.model.find_type(type);
  const auto& entries = td->assignable_user_types.at(relation);
  const auto& entry = entries[static_cast<std::size_t>(
      pick(rng, 0, static_cast<int>(entries.size()) - 1))];
  if (entry.relation) {
    tuple.user = ods::UserRef::userset({entry.type, "o" + std::to_string(pick(rng, 0, 4))},
                                       *entry.relation);
  } else {
    tuple.user = ods::UserRef::direct({entry.type, entry.type == "user"
                                                       ? "u" + std::to_string(pick(rng, 0, 5))
                                                       : "o" + std::to_string(pick(rng, 0, 4))});
  }
  if (entry.condition) {
    ods::ConditionRef ref{*entry.condition, {}};
    if (chance(rng, 0.5)) {
      const auto& cond = bundle.model.conditions.at(*entry.condition);
      const std::string param(ods::condition_parameter(cond.predicate.left_operand));
      switch (ods::condition_parameter_type(cond.predicate.left_operand)) {
        case ods::ValueType::Timestamp:
          ref.context.emplace(param,
                              ods::Value::timestamp(kAnchorTime + 3600 * pick(rng, -100, 100)));
          break;
        case ods::ValueType::Integer:
          ref.context.emplace(param, ods::Value::integer(pick(rng, 0, 20)));
          break;
        default:
          ref.context.emplace(param, ods::Value::str(pick_one(rng, purpose_pool())));
          break;
      }
    }
    tuple.condition = std::move(ref);
  }
  return tuple;
}

inline std::vector<ods::RelationshipTuple> gen_tuples(Rng& rng, const ModelBundle& bundle,
                                                      int max_count) {
  std::vector<ods::RelationshipTuple> tuples;
  if (bundle.assignable.empty()) return tuples;
  const int n = pick(rng, 0, max_count);
  for (int i = 0; i < n; ++i) tuples.push_back(gen_tuple(rng, bundle));
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  return tuples;
}

inline ods::CheckRequest gen_request(Rng& rng, const ModelBundle& bundle) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& td : bundle.model.type_definitions)
    for (const auto& [rel, tree] : td.relations) pairs.emplace_back(td.name, rel);
  const auto& [type, relation] = pick_one(rng, pairs);
  ods::CheckRequest request;
  request.object = {type, "o" + std::to_string(pick(rng, 0, 4))};
  request.relation = relation;
  request.user = ods::UserRef::direct({"user", "u" + std::to_string(pick(rng, 0, 5))});
  request.context = gen_context(rng);
  if (!bundle.assignable.empty() && chance(rng, 0.3)) {
    int n = pick(rng, 1, 3);
    for (int i = 0; i < n; ++i) request.contextual_tuples.push_back(gen_tuple(rng, bundle));
  }
  return request;
}

// Scratch directory unique to the calling test, removed up front.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ods_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
