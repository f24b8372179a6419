#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ods/iri.hpp"

namespace ods {

// Namespace IRIs. The data-space vocabulary has no published namespace yet;
// this placeholder is the single point of configuration.
inline constexpr std::string_view kOdrlNamespace = "http://www.w3.org/ns/odrl/2/";
inline constexpr std::string_view kOdsNamespace = "https://w3id.org/ods/";

enum class ParentClass { Party, Action };

enum class Action { Use, Read, Modify, Distribute, Delete, Train, Subscribe, RequestData, Retention, KillJob };
enum class Role { Consumer, Provider, Broker, Monitor };

const char* to_string(ParentClass parent);

/// Lowercase identifier for an action, usable as a relation-name stem
/// (e.g. RequestData -> "request_data").
std::string_view action_name(Action action);
std::string_view role_name(Role role);

struct TermRegistryEntry {
  std::string label;        // vocabulary label, e.g. "Train" or "use"
  ParentClass parent_class;
  std::string definition;
  Iri iri;
  std::string compact;      // canonical compact form, e.g. "ods:train"
  std::optional<Action> action;  // set for Action entries
  std::optional<Role> role;      // set for data-space Party entries
};

/// The closed term registry: the nine data-space vocabulary entries plus the
/// admitted core actions (use, read, modify, distribute, delete).
const std::vector<TermRegistryEntry>& term_registry();

/// Looks up by compact form ("ods:train", case-insensitive local part) or by
/// absolute IRI. Returns nullptr when nothing matches.
const TermRegistryEntry* find_term(std::string_view text);

/// Same as find_term but throws UnknownTerm.
const TermRegistryEntry& resolve_term(std::string_view text);

const TermRegistryEntry& entry_for(Action action);
const TermRegistryEntry& entry_for(Role role);

}  // namespace ods
