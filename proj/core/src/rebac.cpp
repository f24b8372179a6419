#include "ods/rebac.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "ods/error.hpp"

namespace ods {

RewriteTree RewriteTree::union_of(std::vector<RewriteTree> children) {
  if (children.size() == 1) return std::move(children.front());
  return {Kind::Union, {}, {}, std::move(children)};
}

RewriteTree RewriteTree::intersection_of(std::vector<RewriteTree> children) {
  if (children.size() == 1) return std::move(children.front());
  return {Kind::Intersection, {}, {}, std::move(children)};
}

RewriteTree RewriteTree::exclusion(RewriteTree base, RewriteTree subtract) {
  std::vector<RewriteTree> children;
  children.push_back(std::move(base));
  children.push_back(std::move(subtract));
  return {Kind::Exclusion, {}, {}, std::move(children)};
}

int RewriteTree::depth() const {
  int max_child = 0;
  for (const auto& child : children) max_child = std::max(max_child, child.depth());
  return 1 + max_child;
}

bool RewriteTree::contains_direct() const {
  if (kind == Kind::Direct) return true;
  return std::any_of(children.begin(), children.end(),
                     [](const RewriteTree& c) { return c.contains_direct(); });
}

std::string_view condition_parameter(Operand operand) {
  switch (operand) {
    case Operand::DateTime: return "current_time";
    case Operand::Purpose: return "purpose";
    case Operand::Count: return "count";
  }
  return "?";
}

ValueType condition_parameter_type(Operand operand) {
  switch (operand) {
    case Operand::DateTime: return ValueType::Timestamp;
    case Operand::Purpose: return ValueType::Text;
    case Operand::Count: return ValueType::Integer;
  }
  return ValueType::Text;
}

const TypeDefinition* AuthorizationModel::find_type(std::string_view name) const {
  for (const auto& td : type_definitions)
    if (td.name == name) return &td;
  return nullptr;
}

const RewriteTree* AuthorizationModel::find_relation(std::string_view type,
                                                     std::string_view relation) const {
  const auto* td = find_type(type);
  if (!td) return nullptr;
  auto it = td->relations.find(std::string(relation));
  return it == td->relations.end() ? nullptr : &it->second;
}

namespace {

bool lowercase_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!std::islower(static_cast<unsigned char>(name[0]))) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::islower(c) || std::isdigit(c) || c == '_';
  });
}

void check_tree(const AuthorizationModel& model, const TypeDefinition& td,
                const RewriteTree& tree, const std::string& path,
                std::vector<Diagnostic>& out) {
  switch (tree.kind) {
    case RewriteTree::Kind::Direct:
      break;
    case RewriteTree::Kind::ComputedUserset:
      if (!td.relations.contains(tree.relation))
        out.push_back({Severity::Error, "MDL001",
                       "computed userset references missing relation '" + tree.relation + "'",
                       path});
      break;
    case RewriteTree::Kind::TupleToUserset: {
      if (!td.relations.contains(tree.tupleset_relation))
        out.push_back({Severity::Error, "MDL001",
                       "tupleset relation '" + tree.tupleset_relation + "' missing on type '" +
                           td.name + "'",
                       path});
      bool anywhere = false;
      for (const auto& other : model.type_definitions)
        if (other.relations.contains(tree.relation)) anywhere = true;
      if (!anywhere)
        out.push_back({Severity::Error, "MDL001",
                       "computed relation '" + tree.relation + "' exists on no type", path});
      break;
    }
    case RewriteTree::Kind::Union:
    case RewriteTree::Kind::Intersection:
      if (tree.children.size() < 2)
        out.push_back({Severity::Error, "MDL003",
                       "union/intersection requires at least two children", path});
      break;
    case RewriteTree::Kind::Exclusion:
      if (tree.children.size() != 2)
        out.push_back({Severity::Error, "MDL003", "exclusion requires base and subtract", path});
      break;
  }
  for (std::size_t i = 0; i < tree.children.size(); ++i)
    check_tree(model, td, tree.children[i], path + "/" + std::to_string(i), out);
}

}  // namespace

std::vector<Diagnostic> validate_model(const AuthorizationModel& model) {
  std::vector<Diagnostic> out;
  if (model.schema_version != kSchemaVersion)
    out.push_back({Severity::Error, "MDL007",
                   "unsupported schema version '" + model.schema_version + "'",
                   "/schema_version"});
  for (std::size_t i = 0; i + 1 < model.type_definitions.size(); ++i)
    if (!(model.type_definitions[i].name < model.type_definitions[i + 1].name))
      out.push_back({Severity::Error, "MDL002", "type definitions not sorted or not unique",
                     "/type_definitions"});
  for (const auto& td : model.type_definitions) {
    const std::string base = "/type_definitions/" + td.name;
    if (!lowercase_identifier(td.name))
      out.push_back({Severity::Error, "MDL002", "type name is not a lowercase identifier", base});
    for (const auto& [rel, tree] : td.relations) {
      const std::string rel_path = base + "/relations/" + rel;
      if (!lowercase_identifier(rel))
        out.push_back({Severity::Error, "MDL002", "relation name is not a lowercase identifier",
                       rel_path});
      if (tree.depth() > kMaxRewriteDepth)
        out.push_back({Severity::Error, "MDL003", "rewrite tree exceeds maximum depth", rel_path});
      check_tree(model, td, tree, rel_path, out);
      const bool has_meta = td.assignable_user_types.contains(rel);
      if (tree.contains_direct() != has_meta)
        out.push_back({Severity::Error, "MDL004",
                       has_meta ? "metadata on a relation with no direct leaf"
                                : "direct leaf without directly-assignable metadata",
                       rel_path});
    }
    for (const auto& [rel, types] : td.assignable_user_types) {
      const std::string meta_path = base + "/metadata/" + rel;
      if (!td.relations.contains(rel))
        out.push_back({Severity::Error, "MDL004", "metadata for missing relation", meta_path});
      for (const auto& aut : types) {
        const auto* target = model.find_type(aut.type);
        if (!target)
          out.push_back({Severity::Error, "MDL001", "unknown subject type '" + aut.type + "'",
                         meta_path});
        else if (aut.relation && !target->relations.contains(*aut.relation))
          out.push_back({Severity::Error, "MDL001",
                         "subject userset relation '" + *aut.relation + "' missing on '" +
                             aut.type + "'",
                         meta_path});
        if (aut.condition && !model.conditions.contains(*aut.condition))
          out.push_back({Severity::Error, "MDL005",
                         "unknown condition '" + *aut.condition + "'", meta_path});
      }
    }
  }
  for (const auto& [name, cond] : model.conditions) {
    const std::string path = "/conditions/" + name;
    if (name != cond.name)
      out.push_back({Severity::Error, "MDL006", "condition name mismatch", path});
    const std::string param(condition_parameter(cond.predicate.left_operand));
    auto it = cond.parameters.find(param);
    if (it == cond.parameters.end())
      out.push_back({Severity::Error, "MDL006",
                     "predicate parameter '" + param + "' is not declared", path});
    else if (it->second != condition_parameter_type(cond.predicate.left_operand))
      out.push_back({Severity::Error, "MDL006",
                     "parameter '" + param + "' has the wrong type", path});
  }
  sort_diagnostics(out);
  return out;
}

ObjectRef ObjectRef::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
    throw OdsError(ErrorKind::MalformedDocument, "object must be 'type:id': '" +
                                                      std::string(text) + "'");
  ObjectRef ref{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
  if (ref.id.find(':') != std::string::npos || ref.id.find('#') != std::string::npos)
    throw OdsError(ErrorKind::MalformedDocument, "object id must not contain ':' or '#'");
  return ref;
}

std::string UserRef::render() const {
  return userset_relation ? object.render() + "#" + *userset_relation : object.render();
}

UserRef UserRef::parse(std::string_view text) {
  auto hash = text.find('#');
  if (hash == std::string_view::npos) return direct(ObjectRef::parse(text));
  if (hash + 1 == text.size())
    throw OdsError(ErrorKind::MalformedDocument, "empty userset relation in '" +
                                                      std::string(text) + "'");
  return userset(ObjectRef::parse(text.substr(0, hash)), std::string(text.substr(hash + 1)));
}

namespace {

using nlohmann::json;

json value_to_json(const Value& value) {
  switch (value.type) {
    case ValueType::Timestamp: return format_rfc3339(value.number);
    case ValueType::Integer: return value.number;
    case ValueType::Text: return value.text;
    case ValueType::TextList: return value.list;
  }
  return nullptr;
}

Value value_from_json(const json& node, const std::string& where) {
  if (node.is_string()) {
    auto text = node.get<std::string>();
    if (auto ts = parse_rfc3339(text)) return Value::timestamp(*ts);
    return Value::str(std::move(text));
  }
  if (node.is_number_integer()) return Value::integer(node.get<std::int64_t>());
  if (node.is_array()) {
    std::vector<std::string> items;
    for (const auto& item : node) {
      if (!item.is_string())
        throw OdsError(ErrorKind::MalformedDocument, "expected string list", where);
      items.push_back(item.get<std::string>());
    }
    return Value::strings(std::move(items));
  }
  throw OdsError(ErrorKind::MalformedDocument, "unsupported value", where);
}

}  // namespace

std::string RelationshipTuple::render() const {
  std::string out = user.render() + " " + relation + " " + object.render();
  if (condition) {
    json ctx = json::object();
    for (const auto& [key, value] : condition->context) ctx[key] = value_to_json(value);
    json cond = {{"context", ctx}, {"name", condition->name}};
    out += " " + cond.dump();
  }
  return out;
}

RelationshipTuple RelationshipTuple::parse(std::string_view line) {
  auto first = line.find(' ');
  auto second = first == std::string_view::npos ? first : line.find(' ', first + 1);
  if (second == std::string_view::npos)
    throw OdsError(ErrorKind::MalformedDocument, "tuple line needs 'user relation object': '" +
                                                      std::string(line) + "'");
  RelationshipTuple tuple;
  tuple.user = UserRef::parse(line.substr(0, first));
  tuple.relation = std::string(line.substr(first + 1, second - first - 1));
  auto rest = line.substr(second + 1);
  auto space = rest.find(' ');
  if (space == std::string_view::npos) {
    tuple.object = ObjectRef::parse(rest);
    return tuple;
  }
  tuple.object = ObjectRef::parse(rest.substr(0, space));
  json cond = json::parse(rest.substr(space + 1), nullptr, false);
  if (cond.is_discarded() || !cond.is_object() || !cond.contains("name"))
    throw OdsError(ErrorKind::MalformedDocument, "malformed tuple condition: '" +
                                                      std::string(line) + "'");
  ConditionRef ref;
  ref.name = cond.at("name").get<std::string>();
  if (cond.contains("context"))
    for (const auto& [key, value] : cond.at("context").items())
      ref.context.emplace(key, value_from_json(value, "tuple condition context"));
  tuple.condition = std::move(ref);
  return tuple;
}

}  // namespace ods
