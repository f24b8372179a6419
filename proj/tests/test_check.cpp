#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "ods/check.hpp"
#include "ods/compiler.hpp"
#include "ods/error.hpp"
#include "test_support.hpp"

using namespace ods;

namespace {

AuthorizationModel triple_model(std::optional<std::string>* grant_condition = nullptr) {
  AuthorizationModel model;
  std::optional<std::string> cond_name;
  if (grant_condition) {
    Constraint predicate;
    predicate.left_operand = Operand::DateTime;
    predicate.op = Operator::Lteq;
    predicate.right_operand = Value::timestamp(testutil::kAnchorTime);
    auto cond = compile_constraint(predicate);
    cond_name = cond.name;
    *grant_condition = cond.name;
    model.conditions.emplace(cond.name, std::move(cond));
  }
  TypeDefinition asset;
  asset.name = "asset";
  asset.relations.emplace("train_grant", RewriteTree::direct());
  asset.assignable_user_types.emplace(
      "train_grant", std::vector<AssignableUserType>{{"user", {}, cond_name}});
  asset.relations.emplace("train_deny", RewriteTree::direct());
  asset.assignable_user_types.emplace("train_deny",
                                      std::vector<AssignableUserType>{{"user", {}, {}}});
  asset.relations.emplace("can_train",
                          RewriteTree::exclusion(RewriteTree::computed("train_grant"),
                                                 RewriteTree::computed("train_deny")));
  TypeDefinition user;
  user.name = "user";
  model.type_definitions.push_back(std::move(asset));
  model.type_definitions.push_back(std::move(user));
  return model;
}

RelationshipTuple tuple_of(const std::string& user, const std::string& relation,
                           std::optional<ConditionRef> condition = {}) {
  return {UserRef::direct({"user", user}), relation, {"asset", "ds1"}, std::move(condition)};
}

CheckRequest request_of(const std::string& user, const std::string& relation) {
  CheckRequest request;
  request.object = {"asset", "ds1"};
  request.relation = relation;
  request.user = UserRef::direct({"user", user});
  return request;
}

bool has_exclusion(const RewriteTree& tree) {
  if (tree.kind == RewriteTree::Kind::Exclusion) return true;
  for (const auto& child : tree.children)
    if (has_exclusion(child)) return true;
  return false;
}

bool has_exclusion(const AuthorizationModel& model) {
  for (const auto& td : model.type_definitions)
    for (const auto& [name, tree] : td.relations)
      if (has_exclusion(tree)) return true;
  return false;
}

}  // namespace

TEST_CASE("exclusion semantics: grant allows, deny dominates, absence denies") {
  auto model = triple_model();
  std::vector<RelationshipTuple> tuples{tuple_of("alice", "train_grant")};
  CHECK(check(tuples, model, request_of("alice", "can_train")).allowed);
  CHECK(!check({}, model, request_of("alice", "can_train")).allowed);
  tuples.push_back(tuple_of("alice", "train_deny"));
  CHECK(!check(tuples, model, request_of("alice", "can_train")).allowed);
  CHECK(check(tuples, model, request_of("alice", "train_grant")).allowed);
}

TEST_CASE("contextual tuples participate exactly like stored ones") {
  auto model = triple_model();
  auto request = request_of("alice", "can_train");
  request.contextual_tuples.push_back(tuple_of("alice", "train_grant"));
  CHECK(check({}, model, request).allowed);
  request.contextual_tuples.push_back(tuple_of("alice", "train_deny"));
  CHECK(!check({}, model, request).allowed);
}

TEST_CASE("temporal boundary on a compiled deadline condition") {
  std::optional<std::string> cond_name;
  auto model = triple_model(&cond_name);
  std::vector<RelationshipTuple> tuples{
      tuple_of("alice", "train_grant", ConditionRef{*cond_name, {}})};

  auto at = [&](std::optional<std::int64_t> now) {
    auto request = request_of("alice", "can_train");
    if (now) request.context.emplace("current_time", Value::timestamp(*now));
    return check(tuples, model, request);
  };
  CHECK(at(testutil::kAnchorTime - 1).allowed);
  CHECK(at(testutil::kAnchorTime).allowed);
  CHECK(!at(testutil::kAnchorTime + 1).allowed);

  auto absent = at(std::nullopt);
  CHECK(!absent.allowed);
  CHECK(absent.missing_context == std::vector<std::string>{"current_time"});
}

TEST_CASE("tuple context supplies condition input and request context overrides it") {
  std::optional<std::string> cond_name;
  auto model = triple_model(&cond_name);
  std::vector<RelationshipTuple> tuples{tuple_of(
      "alice", "train_grant",
      ConditionRef{*cond_name, {{"current_time", Value::timestamp(testutil::kAnchorTime)}}})};

  CHECK(check(tuples, model, request_of("alice", "can_train")).allowed);
  auto request = request_of("alice", "can_train");
  request.context.emplace("current_time", Value::timestamp(testutil::kAnchorTime + 1));
  CHECK(!check(tuples, model, request).allowed);
}

TEST_CASE("self-referential relations resolve to denied with cycle_detected") {
  AuthorizationModel model;
  TypeDefinition asset;
  asset.name = "asset";
  asset.relations.emplace("loop", RewriteTree::computed("loop"));
  TypeDefinition user;
  user.name = "user";
  model.type_definitions.push_back(std::move(asset));
  model.type_definitions.push_back(std::move(user));

  auto decision = check({}, model, request_of("alice", "loop"));
  CHECK(!decision.allowed);
  CHECK(decision.cycle_detected);
}

TEST_CASE("typed failures: unknown relation, userset subject, wrong context type") {
  auto model = triple_model();
  try {
    (void)check({}, model, request_of("alice", "no_such_relation"));
    FAIL("expected UnknownTypeOrRelation");
  } catch (const OdsError& e) {
    CHECK(e.kind() == ErrorKind::UnknownTypeOrRelation);
  }

  auto userset_request = request_of("alice", "can_train");
  userset_request.user = UserRef::userset({"asset", "ds1"}, "train_grant");
  try {
    (void)check({}, model, userset_request);
    FAIL("expected MalformedContext");
  } catch (const OdsError& e) {
    CHECK(e.kind() == ErrorKind::MalformedContext);
  }

  std::optional<std::string> cond_name;
  auto conditioned = triple_model(&cond_name);
  std::vector<RelationshipTuple> tuples{
      tuple_of("alice", "train_grant", ConditionRef{*cond_name, {}})};
  auto bad = request_of("alice", "can_train");
  bad.context.emplace("current_time", Value::str("now"));
  try {
    (void)check(tuples, conditioned, bad);
    FAIL("expected MalformedContext");
  } catch (const OdsError& e) {
    CHECK(e.kind() == ErrorKind::MalformedContext);
  }
}

TEST_CASE("expand mirrors the rewrite structure") {
  auto model = triple_model();
  std::vector<RelationshipTuple> tuples{tuple_of("alice", "train_grant"),
                                        tuple_of("bob", "train_grant")};
  auto grant = expand(tuples, model, {"asset", "ds1"}, "train_grant");
  CHECK(grant.kind == ExpandNode::Kind::Leaf);
  CHECK(grant.users.size() == 2);

  auto can = expand(tuples, model, {"asset", "ds1"}, "can_train");
  CHECK(can.kind == ExpandNode::Kind::Difference);
  REQUIRE(can.children.size() == 2);
  auto flat = flatten(can);
  CHECK(std::set<std::string>(flat.begin(), flat.end()) ==
        std::set<std::string>{"user:alice", "user:bob"});
}

TEST_CASE("flatten(expand) equals the check-allowed set on condition-free models") {
  testutil::Rng rng(31);
  int tested = 0;
  while (tested < 60) {
    auto bundle = testutil::gen_model(rng);
    if (!bundle.model.conditions.empty()) continue;
    ++tested;
    auto tuples = testutil::gen_tuples(rng, bundle, 25);
    for (const auto& td : bundle.model.type_definitions) {
      for (const auto& [relation, tree] : td.relations) {
        ObjectRef object{td.name, "o" + std::to_string(testutil::pick(rng, 0, 4))};
        auto flat = flatten(expand(tuples, bundle.model, object, relation));
        std::set<std::string> flattened(flat.begin(), flat.end());
        for (int u = 0; u < 6; ++u) {
          CheckRequest request;
          request.object = object;
          request.relation = relation;
          request.user = UserRef::direct({"user", "u" + std::to_string(u)});
          const bool allowed = check(tuples, bundle.model, request).allowed;
          CHECK_MESSAGE(allowed == flattened.contains(request.user.render()),
                        td.name << " " << relation << " " << request.user.render());
        }
      }
    }
  }
}

TEST_CASE("evaluate_condition agrees with a direct reimplementation") {
  testutil::Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    auto cond = testutil::gen_condition(rng, "cond_x");
    const std::string param(condition_parameter(cond.predicate.left_operand));
    const ValueType type = condition_parameter_type(cond.predicate.left_operand);

    auto gen_value = [&]() -> Value {
      switch (type) {
        case ValueType::Timestamp:
          return Value::timestamp(testutil::kAnchorTime + 3600 * testutil::pick(rng, -100, 100));
        case ValueType::Integer:
          return Value::integer(testutil::pick(rng, 0, 20));
        default:
          return Value::str(testutil::pick_one(rng, testutil::purpose_pool()));
      }
    };
    std::map<std::string, Value> tuple_context, request_context;
    if (testutil::chance(rng, 0.5)) tuple_context.emplace(param, gen_value());
    if (testutil::chance(rng, 0.5)) request_context.emplace(param, gen_value());

    auto merged = tuple_context;
    for (const auto& [k, v] : request_context) merged[k] = v;
    CondResult expected;
    if (!merged.contains(param)) {
      expected.status = CondResult::Status::Missing;
      expected.missing = {param};
    } else {
      const Value& actual = merged.at(param);
      const Value& bound = cond.predicate.right_operand;
      bool holds = false;
      switch (cond.predicate.op) {
        case Operator::Eq:
          holds = type == ValueType::Text ? actual.text == bound.text
                                          : actual.number == bound.number;
          break;
        case Operator::Lt: holds = actual.number < bound.number; break;
        case Operator::Lteq: holds = actual.number <= bound.number; break;
        case Operator::Gt: holds = actual.number > bound.number; break;
        case Operator::Gteq: holds = actual.number >= bound.number; break;
        case Operator::IsAnyOf:
          holds = std::find(bound.list.begin(), bound.list.end(), actual.text) !=
                  bound.list.end();
          break;
      }
      expected.status = holds ? CondResult::Status::True : CondResult::Status::False;
    }

    auto result = evaluate_condition(cond, tuple_context, request_context);
    CHECK_MESSAGE(result.status == expected.status, "iteration " << i);
    CHECK(result.missing == expected.missing);
  }
}

TEST_CASE("check agrees with the fixpoint oracle on generated instances") {
  testutil::Rng rng(20260103);
  for (int i = 0; i < 300; ++i) {
    auto bundle = testutil::gen_model(rng);
    auto tuples = testutil::gen_tuples(rng, bundle, 40);
    auto request = testutil::gen_request(rng, bundle);
    auto fast = check(tuples, bundle.model, request);
    auto slow = oracle_check(tuples, bundle.model, request);
    REQUIRE_MESSAGE(fast.allowed == slow.allowed,
                    "iteration " << i << " " << request.object.render() << " "
                                 << request.relation << " " << request.user.render());
  }
}

TEST_CASE("memoization never changes the decision and never costs extra visits") {
  testutil::Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    auto bundle = testutil::gen_model(rng);
    auto tuples = testutil::gen_tuples(rng, bundle, 30);
    auto request = testutil::gen_request(rng, bundle);
    auto memoized = check(tuples, bundle.model, request, {.memoize = true});
    auto plain = check(tuples, bundle.model, request, {.memoize = false});
    CHECK(memoized.allowed == plain.allowed);
    CHECK(memoized.missing_context == plain.missing_context);
    CHECK(memoized.nodes_visited <= plain.nodes_visited);
  }
}

TEST_CASE("adding tuples is monotone on exclusion-free models") {
  testutil::Rng rng(29);
  int tested = 0;
  while (tested < 150) {
    auto bundle = testutil::gen_model(rng);
    if (has_exclusion(bundle.model) || bundle.assignable.empty()) continue;
    ++tested;
    auto tuples = testutil::gen_tuples(rng, bundle, 20);
    auto request = testutil::gen_request(rng, bundle);
    if (!check(tuples, bundle.model, request).allowed) continue;

    auto extra = testutil::gen_tuple(rng, bundle);
    if (std::find(tuples.begin(), tuples.end(), extra) == tuples.end()) tuples.push_back(extra);
    std::sort(tuples.begin(), tuples.end());
    CHECK_MESSAGE(check(tuples, bundle.model, request).allowed,
                  "allowed flipped after adding " << extra.render());
  }
}

TEST_CASE("depth cap fails closed instead of overflowing") {
  // rel0 -> rel1 -> ... -> rel29, all computed; the chain is acyclic but
  // longer than the resolution budget.
  AuthorizationModel model;
  TypeDefinition asset;
  asset.name = "asset";
  asset.relations.emplace("rel0", RewriteTree::direct());
  asset.assignable_user_types.emplace("rel0", std::vector<AssignableUserType>{{"user", {}, {}}});
  for (int i = 1; i < 30; ++i)
    asset.relations.emplace("rel" + std::to_string(i),
                            RewriteTree::computed("rel" + std::to_string(i - 1)));
  TypeDefinition user;
  user.name = "user";
  model.type_definitions.push_back(std::move(asset));
  model.type_definitions.push_back(std::move(user));

  std::vector<RelationshipTuple> tuples{tuple_of("alice", "rel0")};
  auto decision = check(tuples, model, request_of("alice", "rel29"));
  CHECK(!decision.allowed);
  CHECK(decision.max_depth_reached >= kMaxResolutionDepth);
  // within budget the same chain resolves
  CHECK(check(tuples, model, request_of("alice", "rel10")).allowed);
}
