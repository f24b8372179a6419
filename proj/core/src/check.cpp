#include "ods/check.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "ods/error.hpp"

namespace ods {

namespace {

using IndexKey = std::tuple<std::string, std::string, std::string>;  // type, id, relation

using TupleIndex = std::map<IndexKey, std::vector<const RelationshipTuple*>>;

TupleIndex build_index(const std::vector<RelationshipTuple>& stored,
                       const std::vector<RelationshipTuple>& contextual) {
  TupleIndex index;
  for (const auto* source : {&stored, &contextual})
    for (const auto& tuple : *source)
      index[{tuple.object.type, tuple.object.id, tuple.relation}].push_back(&tuple);
  return index;
}

void note_missing(std::vector<std::string>& sink, const std::vector<std::string>& missing) {
  for (const auto& name : missing)
    if (std::find(sink.begin(), sink.end(), name) == sink.end()) sink.push_back(name);
}

class Resolver {
 public:
  Resolver(const AuthorizationModel& model, const TupleIndex& index,
           const std::map<std::string, Value>& context, const UserRef& subject,
           const CheckOptions& options)
      : model_(model), index_(index), context_(context), subject_(subject), options_(options) {}

  Decision take_decision() {
    decision_.cycle_detected = cycle_events_ > 0;
    std::sort(decision_.missing_context.begin(), decision_.missing_context.end());
    return decision_;
  }

  bool resolve(const ObjectRef& object, const std::string& relation, int depth) {
    ++decision_.nodes_visited;
    decision_.max_depth_reached =
        std::max<std::uint32_t>(decision_.max_depth_reached, static_cast<std::uint32_t>(depth));
    if (depth > kMaxResolutionDepth) {
      ++depth_events_;
      return false;
    }

    const auto* tree = model_.find_relation(object.type, relation);
    if (!tree) return false;

    const IndexKey key{object.type, object.id, relation};
    if (options_.memoize) {
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    if (in_progress_.contains(key)) {
      ++cycle_events_;
      return false;
    }
    in_progress_.insert(key);
    const auto events_before = event_count();
    const auto* td = model_.find_type(object.type);
    bool result = eval(*tree, *td, object, relation, depth);
    in_progress_.erase(key);
    // Results influenced by a cycle cut or the depth cap are path-dependent
    // and must not be reused.
    if (options_.memoize && event_count() == events_before) memo_.emplace(key, result);
    return result;
  }

 private:
  std::uint64_t event_count() const { return cycle_events_ + depth_events_; }

  bool condition_passes(const RelationshipTuple& tuple) {
    if (!tuple.condition) return true;
    auto it = model_.conditions.find(tuple.condition->name);
    if (it == model_.conditions.end()) return false;  // unknown condition: fail closed
    auto result = evaluate_condition(it->second, tuple.condition->context, context_);
    if (result.status == CondResult::Status::Missing) {
      note_missing(decision_.missing_context, result.missing);
      return false;
    }
    return result.status == CondResult::Status::True;
  }

  bool eval(const RewriteTree& tree, const TypeDefinition& td, const ObjectRef& object,
            const std::string& relation, int depth) {
    ++decision_.nodes_visited;
    switch (tree.kind) {
      case RewriteTree::Kind::Direct: {
        auto it = index_.find({object.type, object.id, relation});
        if (it == index_.end()) return false;
        for (const auto* tuple : it->second) {
          if (!condition_passes(*tuple)) continue;
          if (tuple->user.is_direct()) {
            if (tuple->user == subject_) return true;
          } else if (resolve(tuple->user.object, *tuple->user.userset_relation, depth + 1)) {
            return true;
          }
        }
        return false;
      }
      case RewriteTree::Kind::ComputedUserset:
        return resolve(object, tree.relation, depth + 1);
      case RewriteTree::Kind::TupleToUserset: {
        auto it = index_.find({object.type, object.id, tree.tupleset_relation});
        if (it == index_.end()) return false;
        for (const auto* tuple : it->second) {
          if (!tuple->user.is_direct()) continue;  // usersets are not valid tupleset subjects
          if (!condition_passes(*tuple)) continue;
          if (resolve(tuple->user.object, tree.relation, depth + 1)) return true;
        }
        return false;
      }
      case RewriteTree::Kind::Union:
        for (const auto& child : tree.children)
          if (eval(child, td, object, relation, depth)) return true;
        return false;
      case RewriteTree::Kind::Intersection:
        for (const auto& child : tree.children)
          if (!eval(child, td, object, relation, depth)) return false;
        return true;
      case RewriteTree::Kind::Exclusion:
        return eval(tree.children.at(0), td, object, relation, depth) &&
               !eval(tree.children.at(1), td, object, relation, depth);
    }
    return false;
  }

  const AuthorizationModel& model_;
  const TupleIndex& index_;
  const std::map<std::string, Value>& context_;
  const UserRef& subject_;
  const CheckOptions& options_;
  Decision decision_;
  std::uint64_t cycle_events_ = 0;
  std::uint64_t depth_events_ = 0;
  std::map<IndexKey, bool> memo_;
  std::set<IndexKey> in_progress_;
};

}  // namespace

CondResult evaluate_condition(const ConditionDef& condition,
                              const std::map<std::string, Value>& tuple_context,
                              const std::map<std::string, Value>& request_context) {
  const std::string param(condition_parameter(condition.predicate.left_operand));

  const Value* supplied = nullptr;
  if (auto it = request_context.find(param); it != request_context.end()) supplied = &it->second;
  else if (auto jt = tuple_context.find(param); jt != tuple_context.end()) supplied = &jt->second;
  if (!supplied) return {CondResult::Status::Missing, {param}};

  ValueType expected = condition_parameter_type(condition.predicate.left_operand);
  if (auto it = condition.parameters.find(param); it != condition.parameters.end())
    expected = it->second;
  if (supplied->type != expected)
    throw OdsError(ErrorKind::TypeMismatch,
                   "parameter '" + param + "' expects " + to_string(expected) + ", got " +
                       to_string(supplied->type));

  const Value& right = condition.predicate.right_operand;
  bool holds = false;
  switch (condition.predicate.op) {
    case Operator::Eq: holds = *supplied == right; break;
    case Operator::Lt: holds = supplied->number < right.number; break;
    case Operator::Lteq: holds = supplied->number <= right.number; break;
    case Operator::Gt: holds = supplied->number > right.number; break;
    case Operator::Gteq: holds = supplied->number >= right.number; break;
    case Operator::IsAnyOf:
      holds = std::find(right.list.begin(), right.list.end(), supplied->text) != right.list.end();
      break;
  }
  return {holds ? CondResult::Status::True : CondResult::Status::False, {}};
}

Decision check(const std::vector<RelationshipTuple>& tuples, const AuthorizationModel& model,
               const CheckRequest& request, const CheckOptions& options) {
  if (!request.user.is_direct())
    throw OdsError(ErrorKind::MalformedContext, "check subjects must be direct users");
  if (!model.find_relation(request.object.type, request.relation))
    throw OdsError(ErrorKind::UnknownTypeOrRelation,
                   "no relation '" + request.relation + "' on type '" + request.object.type + "'");
  auto index = build_index(tuples, request.contextual_tuples);
  Resolver resolver(model, index, request.context, request.user, options);
  bool allowed;
  try {
    allowed = resolver.resolve(request.object, request.relation, 0);
  } catch (const OdsError& e) {
    if (e.kind() == ErrorKind::TypeMismatch)
      throw OdsError(ErrorKind::MalformedContext, e.message());
    throw;
  }
  Decision decision = resolver.take_decision();
  decision.allowed = allowed;
  return decision;
}

namespace {

class Expander {
 public:
  Expander(const AuthorizationModel& model, const TupleIndex& index) : model_(model), index_(index) {}

  ExpandNode expand_relation(const ObjectRef& object, const std::string& relation, int depth) {
    const auto* tree = model_.find_relation(object.type, relation);
    if (!tree || depth <= 0) return leaf(relation);
    const IndexKey key{object.type, object.id, relation};
    if (in_progress_.contains(key)) return leaf(relation);
    in_progress_.insert(key);
    auto node = expand_tree(*tree, object, relation, depth);
    in_progress_.erase(key);
    node.label = object.render() + "#" + relation;
    return node;
  }

 private:
  static ExpandNode leaf(const std::string& label) {
    return {ExpandNode::Kind::Leaf, label, {}, {}};
  }

  // Conditioned tuples are resolved against an empty context: conditions
  // fail closed, so they contribute no leaves.
  bool usable(const RelationshipTuple& tuple) {
    if (!tuple.condition) return true;
    auto it = model_.conditions.find(tuple.condition->name);
    if (it == model_.conditions.end()) return false;
    auto result = evaluate_condition(it->second, tuple.condition->context, {});
    return result.status == CondResult::Status::True;
  }

  ExpandNode expand_tree(const RewriteTree& tree, const ObjectRef& object,
                         const std::string& relation, int depth) {
    switch (tree.kind) {
      case RewriteTree::Kind::Direct: {
        ExpandNode node = leaf("direct");
        std::vector<ExpandNode> userset_children;
        auto it = index_.find({object.type, object.id, relation});
        if (it != index_.end()) {
          for (const auto* tuple : it->second) {
            if (!usable(*tuple)) continue;
            if (tuple->user.is_direct())
              node.users.push_back(tuple->user.render());
            else
              userset_children.push_back(expand_relation(tuple->user.object,
                                                         *tuple->user.userset_relation,
                                                         depth - 1));
          }
        }
        std::sort(node.users.begin(), node.users.end());
        if (userset_children.empty()) return node;
        ExpandNode wrapper{ExpandNode::Kind::Union, "direct", {}, {}};
        wrapper.children.push_back(std::move(node));
        for (auto& child : userset_children) wrapper.children.push_back(std::move(child));
        return wrapper;
      }
      case RewriteTree::Kind::ComputedUserset:
        return expand_relation(object, tree.relation, depth - 1);
      case RewriteTree::Kind::TupleToUserset: {
        ExpandNode node{ExpandNode::Kind::Union, "tupleToUserset", {}, {}};
        auto it = index_.find({object.type, object.id, tree.tupleset_relation});
        if (it != index_.end())
          for (const auto* tuple : it->second) {
            if (!tuple->user.is_direct() || !usable(*tuple)) continue;
            node.children.push_back(
                expand_relation(tuple->user.object, tree.relation, depth - 1));
          }
        if (node.children.empty()) return leaf("tupleToUserset");
        return node;
      }
      case RewriteTree::Kind::Union:
      case RewriteTree::Kind::Intersection: {
        ExpandNode node{tree.kind == RewriteTree::Kind::Union ? ExpandNode::Kind::Union
                                                              : ExpandNode::Kind::Intersection,
                        "", {}, {}};
        for (const auto& child : tree.children)
          node.children.push_back(expand_tree(child, object, relation, depth));
        return node;
      }
      case RewriteTree::Kind::Exclusion: {
        ExpandNode node{ExpandNode::Kind::Difference, "", {}, {}};
        node.children.push_back(expand_tree(tree.children.at(0), object, relation, depth));
        node.children.push_back(expand_tree(tree.children.at(1), object, relation, depth));
        return node;
      }
    }
    return leaf("");
  }

  const AuthorizationModel& model_;
  const TupleIndex& index_;
  std::set<IndexKey> in_progress_;
};

std::set<std::string> flatten_set(const ExpandNode& node) {
  std::set<std::string> out(node.users.begin(), node.users.end());
  switch (node.kind) {
    case ExpandNode::Kind::Leaf:
      break;
    case ExpandNode::Kind::Union:
      for (const auto& child : node.children) {
        auto sub = flatten_set(child);
        out.insert(sub.begin(), sub.end());
      }
      break;
    case ExpandNode::Kind::Intersection: {
      bool first = true;
      std::set<std::string> acc;
      for (const auto& child : node.children) {
        auto sub = flatten_set(child);
        if (first) {
          acc = std::move(sub);
          first = false;
        } else {
          std::set<std::string> kept;
          for (const auto& user : acc)
            if (sub.contains(user)) kept.insert(user);
          acc = std::move(kept);
        }
      }
      out.insert(acc.begin(), acc.end());
      break;
    }
    case ExpandNode::Kind::Difference: {
      auto base = flatten_set(node.children.at(0));
      auto subtract = flatten_set(node.children.at(1));
      for (const auto& user : base)
        if (!subtract.contains(user)) out.insert(user);
      break;
    }
  }
  return out;
}

}  // namespace

ExpandNode expand(const std::vector<RelationshipTuple>& tuples, const AuthorizationModel& model,
                  const ObjectRef& object, const std::string& relation, int max_depth) {
  if (!model.find_relation(object.type, relation))
    throw OdsError(ErrorKind::UnknownTypeOrRelation,
                   "no relation '" + relation + "' on type '" + object.type + "'");
  static const std::vector<RelationshipTuple> no_contextual;
  auto index = build_index(tuples, no_contextual);
  Expander expander(model, index);
  return expander.expand_relation(object, relation, max_depth);
}

std::vector<std::string> flatten(const ExpandNode& node) {
  auto set = flatten_set(node);
  return {set.begin(), set.end()};
}

namespace {

// Deliberately separate from evaluate_condition so the oracle does not share
// the code path it is checking.
bool oracle_condition(const ConditionDef& condition,
                      const std::map<std::string, Value>& tuple_context,
                      const std::map<std::string, Value>& request_context) {
  const std::string param(condition_parameter(condition.predicate.left_operand));
  const std::map<std::string, Value>* source = nullptr;
  if (request_context.contains(param)) source = &request_context;
  else if (tuple_context.contains(param)) source = &tuple_context;
  if (!source) return false;  // fail closed, same as check
  const Value& v = source->at(param);
  if (v.type != condition_parameter_type(condition.predicate.left_operand)) return false;
  const Value& r = condition.predicate.right_operand;
  switch (condition.predicate.op) {
    case Operator::Eq: return v == r;
    case Operator::Lt: return v.number < r.number;
    case Operator::Lteq: return v.number <= r.number;
    case Operator::Gt: return v.number > r.number;
    case Operator::Gteq: return v.number >= r.number;
    case Operator::IsAnyOf:
      return std::find(r.list.begin(), r.list.end(), v.text) != r.list.end();
  }
  return false;
}

}  // namespace

Decision oracle_check(const std::vector<RelationshipTuple>& tuples,
                      const AuthorizationModel& model, const CheckRequest& request) {
  if (!model.find_relation(request.object.type, request.relation))
    throw OdsError(ErrorKind::UnknownTypeOrRelation,
                   "no relation '" + request.relation + "' on type '" + request.object.type + "'");

  std::vector<RelationshipTuple> all = tuples;
  all.insert(all.end(), request.contextual_tuples.begin(), request.contextual_tuples.end());

  std::set<ObjectRef> objects{request.object};
  for (const auto& tuple : all) {
    objects.insert(tuple.object);
    objects.insert(tuple.user.object);
  }

  using Key = std::pair<ObjectRef, std::string>;
  std::map<Key, std::set<std::string>> usersets;
  for (const auto& object : objects) {
    const auto* td = model.find_type(object.type);
    if (!td) continue;
    for (const auto& [relation, tree] : td->relations) {
      (void)tree;
      usersets[{object, relation}] = {};
    }
  }

  auto passes = [&](const RelationshipTuple& tuple) {
    if (!tuple.condition) return true;
    auto it = model.conditions.find(tuple.condition->name);
    if (it == model.conditions.end()) return false;
    return oracle_condition(it->second, tuple.condition->context, request.context);
  };

  std::function<std::set<std::string>(const RewriteTree&, const ObjectRef&, const std::string&)>
      eval = [&](const RewriteTree& tree, const ObjectRef& object,
                 const std::string& relation) -> std::set<std::string> {
    std::set<std::string> out;
    switch (tree.kind) {
      case RewriteTree::Kind::Direct:
        for (const auto& tuple : all) {
          if (!(tuple.object == object) || tuple.relation != relation) continue;
          if (!passes(tuple)) continue;
          if (tuple.user.is_direct()) {
            out.insert(tuple.user.render());
          } else {
            auto it = usersets.find({tuple.user.object, *tuple.user.userset_relation});
            if (it != usersets.end()) out.insert(it->second.begin(), it->second.end());
          }
        }
        break;
      case RewriteTree::Kind::ComputedUserset: {
        auto it = usersets.find({object, tree.relation});
        if (it != usersets.end()) out = it->second;
        break;
      }
      case RewriteTree::Kind::TupleToUserset:
        for (const auto& tuple : all) {
          if (!(tuple.object == object) || tuple.relation != tree.tupleset_relation) continue;
          if (!tuple.user.is_direct() || !passes(tuple)) continue;
          auto it = usersets.find({tuple.user.object, tree.relation});
          if (it != usersets.end()) out.insert(it->second.begin(), it->second.end());
        }
        break;
      case RewriteTree::Kind::Union:
        for (const auto& child : tree.children) {
          auto sub = eval(child, object, relation);
          out.insert(sub.begin(), sub.end());
        }
        break;
      case RewriteTree::Kind::Intersection: {
        bool first = true;
        for (const auto& child : tree.children) {
          auto sub = eval(child, object, relation);
          if (first) {
            out = std::move(sub);
            first = false;
          } else {
            std::set<std::string> kept;
            for (const auto& user : out)
              if (sub.contains(user)) kept.insert(user);
            out = std::move(kept);
          }
        }
        break;
      }
      case RewriteTree::Kind::Exclusion: {
        auto base = eval(tree.children.at(0), object, relation);
        auto subtract = eval(tree.children.at(1), object, relation);
        for (const auto& user : base)
          if (!subtract.contains(user)) out.insert(user);
        break;
      }
    }
    return out;
  };

  const std::size_t max_rounds = 2 * usersets.size() + 10;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (auto& [key, current] : usersets) {
      const auto* tree = model.find_relation(key.first.type, key.second);
      auto next = eval(*tree, key.first, key.second);
      if (next != current) {
        current = std::move(next);
        changed = true;
      }
    }
    if (!changed) break;
  }

  Decision decision;
  decision.allowed =
      usersets[{request.object, request.relation}].contains(request.user.render());
  return decision;
}

}  // namespace ods
