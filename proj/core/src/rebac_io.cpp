#include "ods/rebac_io.hpp"

#include <nlohmann/json.hpp>

#include "ods/error.hpp"

namespace ods {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const char* operator_symbol(Operator op) {
  switch (op) {
    case Operator::Eq: return "==";
    case Operator::Lt: return "<";
    case Operator::Lteq: return "<=";
    case Operator::Gt: return ">";
    case Operator::Gteq: return ">=";
    case Operator::IsAnyOf: return "in";
  }
  return "?";
}

std::optional<Operator> operator_from_symbol(std::string_view sym) {
  if (sym == "==") return Operator::Eq;
  if (sym == "<") return Operator::Lt;
  if (sym == "<=") return Operator::Lteq;
  if (sym == ">") return Operator::Gt;
  if (sym == ">=") return Operator::Gteq;
  if (sym == "in") return Operator::IsAnyOf;
  return std::nullopt;
}

std::optional<Operand> operand_from_parameter(std::string_view param) {
  if (param == condition_parameter(Operand::DateTime)) return Operand::DateTime;
  if (param == condition_parameter(Operand::Purpose)) return Operand::Purpose;
  if (param == condition_parameter(Operand::Count)) return Operand::Count;
  return std::nullopt;
}

const char* type_name(ValueType type) { return to_string(type); }

std::optional<ValueType> type_from_name(std::string_view name) {
  if (name == "timestamp") return ValueType::Timestamp;
  if (name == "text") return ValueType::Text;
  if (name == "integer") return ValueType::Integer;
  if (name == "text_list") return ValueType::TextList;
  return std::nullopt;
}

ordered_json tree_to_json(const RewriteTree& tree) {
  ordered_json out;
  switch (tree.kind) {
    case RewriteTree::Kind::Direct:
      out["this"] = ordered_json::object();
      break;
    case RewriteTree::Kind::ComputedUserset:
      out["computedUserset"] = {{"relation", tree.relation}};
      break;
    case RewriteTree::Kind::TupleToUserset:
      out["tupleToUserset"] = {{"tupleset", {{"relation", tree.tupleset_relation}}},
                               {"computedUserset", {{"relation", tree.relation}}}};
      break;
    case RewriteTree::Kind::Union:
    case RewriteTree::Kind::Intersection: {
      auto children = ordered_json::array();
      for (const auto& child : tree.children) children.push_back(tree_to_json(child));
      out[tree.kind == RewriteTree::Kind::Union ? "union" : "intersection"] = {
          {"child", std::move(children)}};
      break;
    }
    case RewriteTree::Kind::Exclusion:
      out["difference"] = {{"base", tree_to_json(tree.children.at(0))},
                           {"subtract", tree_to_json(tree.children.at(1))}};
      break;
  }
  return out;
}

RewriteTree tree_from_json(const json& node, const std::string& path) {
  if (!node.is_object() || node.size() != 1)
    throw OdsError(ErrorKind::MalformedDocument, "rewrite node must have exactly one key", path);
  if (node.contains("this")) return RewriteTree::direct();
  if (node.contains("computedUserset"))
    return RewriteTree::computed(node.at("computedUserset").at("relation").get<std::string>());
  if (node.contains("tupleToUserset")) {
    const auto& ttu = node.at("tupleToUserset");
    return RewriteTree::tuple_to_userset(
        ttu.at("tupleset").at("relation").get<std::string>(),
        ttu.at("computedUserset").at("relation").get<std::string>());
  }
  if (node.contains("union") || node.contains("intersection")) {
    const bool is_union = node.contains("union");
    const auto& children = node.at(is_union ? "union" : "intersection").at("child");
    std::vector<RewriteTree> parsed;
    for (std::size_t i = 0; i < children.size(); ++i)
      parsed.push_back(tree_from_json(children[i], path + "/" + std::to_string(i)));
    RewriteTree tree;
    tree.kind = is_union ? RewriteTree::Kind::Union : RewriteTree::Kind::Intersection;
    tree.children = std::move(parsed);
    return tree;
  }
  if (node.contains("difference")) {
    const auto& diff = node.at("difference");
    return RewriteTree::exclusion(tree_from_json(diff.at("base"), path + "/base"),
                                  tree_from_json(diff.at("subtract"), path + "/subtract"));
  }
  throw OdsError(ErrorKind::MalformedDocument, "unknown rewrite node", path);
}

std::string quote(const std::string& text) { return json(text).dump(); }

}  // namespace

std::string render_condition_expression(const Constraint& predicate) {
  std::string literal;
  switch (predicate.right_operand.type) {
    case ValueType::Timestamp:
      literal = format_rfc3339(predicate.right_operand.number);
      break;
    case ValueType::Integer:
      literal = std::to_string(predicate.right_operand.number);
      break;
    case ValueType::Text:
      literal = quote(predicate.right_operand.text);
      break;
    case ValueType::TextList:
      literal = json(predicate.right_operand.list).dump();
      break;
  }
  return std::string(condition_parameter(predicate.left_operand)) + " " +
         operator_symbol(predicate.op) + " " + literal;
}

Constraint parse_condition_expression(std::string_view expression) {
  auto first = expression.find(' ');
  auto second = first == std::string_view::npos ? first : expression.find(' ', first + 1);
  if (second == std::string_view::npos)
    throw OdsError(ErrorKind::MalformedDocument,
                   "condition expression must be '<param> <op> <literal>'");
  Constraint predicate;
  auto param = expression.substr(0, first);
  auto operand = operand_from_parameter(param);
  if (!operand)
    throw OdsError(ErrorKind::InvalidModel,
                   "unknown condition parameter '" + std::string(param) + "'");
  predicate.left_operand = *operand;
  auto op = operator_from_symbol(expression.substr(first + 1, second - first - 1));
  if (!op) throw OdsError(ErrorKind::MalformedDocument, "unknown condition operator");
  predicate.op = *op;
  auto literal = std::string(expression.substr(second + 1));
  if (!literal.empty() && (literal.front() == '"' || literal.front() == '[')) {
    json value = json::parse(literal, nullptr, false);
    if (value.is_string()) {
      predicate.right_operand = Value::str(value.get<std::string>());
    } else if (value.is_array()) {
      std::vector<std::string> items;
      for (const auto& item : value) items.push_back(item.get<std::string>());
      predicate.right_operand = Value::strings(std::move(items));
    } else {
      throw OdsError(ErrorKind::MalformedDocument, "malformed condition literal");
    }
  } else if (auto ts = parse_rfc3339(literal)) {
    predicate.right_operand = Value::timestamp(*ts);
  } else {
    try {
      predicate.right_operand = Value::integer(std::stoll(literal));
    } catch (const std::exception&) {
      throw OdsError(ErrorKind::MalformedDocument,
                     "malformed condition literal '" + literal + "'");
    }
  }
  return predicate;
}

std::string export_model(const AuthorizationModel& model) {
  auto findings = validate_model(model);
  if (has_errors(findings))
    throw OdsError(ErrorKind::InvalidModel, "model fails validation: " + render(findings[0]));

  ordered_json out;
  out["schema_version"] = model.schema_version;
  auto& types = out["type_definitions"] = ordered_json::array();
  for (const auto& td : model.type_definitions) {
    ordered_json node;
    node["type"] = td.name;
    auto& relations = node["relations"] = ordered_json::object();
    for (const auto& [rel, tree] : td.relations) relations[rel] = tree_to_json(tree);
    if (!td.assignable_user_types.empty()) {
      auto& meta = node["metadata"]["relations"] = ordered_json::object();
      for (const auto& [rel, entries] : td.assignable_user_types) {
        auto sorted = entries;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        auto& list = meta[rel]["directly_related_user_types"] = ordered_json::array();
        for (const auto& aut : sorted) {
          ordered_json entry;
          entry["type"] = aut.type;
          if (aut.relation) entry["relation"] = *aut.relation;
          if (aut.condition) entry["condition"] = *aut.condition;
          list.push_back(std::move(entry));
        }
      }
    }
    types.push_back(std::move(node));
  }
  if (!model.conditions.empty()) {
    auto& conditions = out["conditions"] = ordered_json::object();
    for (const auto& [name, cond] : model.conditions) {
      ordered_json node;
      node["name"] = cond.name;
      node["expression"] = render_condition_expression(cond.predicate);
      auto& params = node["parameters"] = ordered_json::object();
      for (const auto& [pname, ptype] : cond.parameters)
        params[pname] = {{"type_name", type_name(ptype)}};
      conditions[name] = std::move(node);
    }
  }
  return out.dump(2) + "\n";
}

AuthorizationModel import_model(std::string_view document) {
  json root = json::parse(document, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw OdsError(ErrorKind::MalformedDocument, "interchange document is not an object");
  AuthorizationModel model;
  if (!root.contains("schema_version") || !root.at("schema_version").is_string())
    throw OdsError(ErrorKind::MalformedDocument, "missing schema_version");
  model.schema_version = root.at("schema_version").get<std::string>();
  if (model.schema_version != kSchemaVersion)
    throw OdsError(ErrorKind::InvalidModel,
                   "unsupported schema version '" + model.schema_version + "'");
  try {
    if (root.contains("type_definitions")) {
      for (const auto& node : root.at("type_definitions")) {
        TypeDefinition td;
        td.name = node.at("type").get<std::string>();
        if (node.contains("relations"))
          for (const auto& [rel, tree] : node.at("relations").items())
            td.relations.emplace(
                rel, tree_from_json(tree, "/type_definitions/" + td.name + "/" + rel));
        if (node.contains("metadata") && node.at("metadata").contains("relations")) {
          for (const auto& [rel, meta] : node.at("metadata").at("relations").items()) {
            std::vector<AssignableUserType> entries;
            for (const auto& entry : meta.value("directly_related_user_types", json::array())) {
              AssignableUserType aut;
              aut.type = entry.at("type").get<std::string>();
              if (entry.contains("relation")) aut.relation = entry.at("relation").get<std::string>();
              if (entry.contains("condition"))
                aut.condition = entry.at("condition").get<std::string>();
              entries.push_back(std::move(aut));
            }
            std::sort(entries.begin(), entries.end());
            entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
            td.assignable_user_types.emplace(rel, std::move(entries));
          }
        }
        model.type_definitions.push_back(std::move(td));
      }
    }
    std::sort(model.type_definitions.begin(), model.type_definitions.end(),
              [](const TypeDefinition& a, const TypeDefinition& b) { return a.name < b.name; });
    if (root.contains("conditions")) {
      for (const auto& [name, node] : root.at("conditions").items()) {
        ConditionDef cond;
        cond.name = node.value("name", name);
        cond.predicate = parse_condition_expression(node.at("expression").get<std::string>());
        const json parameters = node.value("parameters", json::object());
        for (const auto& [pname, pnode] : parameters.items()) {
          auto ptype = type_from_name(pnode.at("type_name").get<std::string>());
          if (!ptype)
            throw OdsError(ErrorKind::InvalidModel, "unknown parameter type in condition " + name);
          cond.parameters.emplace(pname, *ptype);
        }
        model.conditions.emplace(name, std::move(cond));
      }
    }
  } catch (const json::exception& e) {
    throw OdsError(ErrorKind::MalformedDocument, e.what());
  }
  auto findings = validate_model(model);
  if (has_errors(findings))
    throw OdsError(ErrorKind::InvalidModel, "imported model fails validation: " +
                                                render(findings[0]));
  return model;
}

}  // namespace ods
