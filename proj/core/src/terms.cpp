#include "ods/terms.hpp"

#include <algorithm>
#include <cctype>

#include "ods/error.hpp"

namespace ods {

const char* to_string(ParentClass parent) {
  return parent == ParentClass::Party ? "Party" : "Action";
}

std::string_view action_name(Action action) {
  switch (action) {
    case Action::Use: return "use";
    case Action::Read: return "read";
    case Action::Modify: return "modify";
    case Action::Distribute: return "distribute";
    case Action::Delete: return "delete";
    case Action::Train: return "train";
    case Action::Subscribe: return "subscribe";
    case Action::RequestData: return "request_data";
    case Action::Retention: return "retention";
    case Action::KillJob: return "kill_job";
  }
  return "?";
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Consumer: return "consumer";
    case Role::Provider: return "provider";
    case Role::Broker: return "broker";
    case Role::Monitor: return "monitor";
  }
  return "?";
}

namespace {

TermRegistryEntry ods_party(Role role, std::string label, std::string definition) {
  return {label, ParentClass::Party, std::move(definition), Iri(std::string(kOdsNamespace) + label),
          "ods:" + std::string(role_name(role)), std::nullopt, role};
}

TermRegistryEntry ods_action(Action action, std::string label, std::string definition) {
  return {label, ParentClass::Action, std::move(definition),
          Iri(std::string(kOdsNamespace) + label), "ods:" + std::string(action_name(action)),
          action, std::nullopt};
}

TermRegistryEntry core_action(Action action, std::string definition) {
  std::string name(action_name(action));
  return {name, ParentClass::Action, std::move(definition),
          Iri(std::string(kOdrlNamespace) + name), "odrl:" + name, action, std::nullopt};
}

std::vector<TermRegistryEntry> build_registry() {
  std::vector<TermRegistryEntry> reg;
  reg.push_back(ods_party(Role::Consumer, "Consumer",
                          "Party acting as the intended user of the data under the rule."));
  reg.push_back(ods_party(Role::Provider, "Provider",
                          "Party that offers or shares the data asset under the rule."));
  reg.push_back(ods_party(Role::Broker, "Broker",
                          "Party that intermediates data exchanges between providers and "
                          "consumers."));
  reg.push_back(ods_party(Role::Monitor, "Monitor",
                          "Party that oversees compliance with the rule without being directly "
                          "involved in data usage."));
  reg.push_back(ods_action(Action::Train, "Train", "Train a machine learning model on the data."));
  reg.push_back(ods_action(Action::Subscribe, "Subscribe",
                           "Subscribe to a dataset, service, or data stream."));
  reg.push_back(ods_action(Action::RequestData, "Request_data",
                           "Request specific data from other data-space participants."));
  reg.push_back(ods_action(Action::Retention, "Retention",
                           "Maximum data retention period before deletion or archiving."));
  reg.push_back(ods_action(Action::KillJob, "Kill_job", "Kill the currently executing job."));
  reg.push_back(core_action(Action::Use, "Use the asset."));
  reg.push_back(core_action(Action::Read, "Read the asset without modifying it."));
  reg.push_back(core_action(Action::Modify, "Modify the asset."));
  reg.push_back(core_action(Action::Distribute, "Distribute the asset to third parties."));
  reg.push_back(core_action(Action::Delete, "Delete the asset."));
  return reg;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

const std::vector<TermRegistryEntry>& term_registry() {
  static const std::vector<TermRegistryEntry> registry = build_registry();
  return registry;
}

const TermRegistryEntry* find_term(std::string_view text) {
  const std::string needle = lower(text);
  for (const auto& entry : term_registry()) {
    if (needle == entry.compact) return &entry;
    if (needle == lower(entry.iri.text())) return &entry;
    // compact form with the table spelling, e.g. "ods:Request_data"
    auto colon = needle.find(':');
    if (colon != std::string::npos && needle.substr(0, colon + 1) == "ods:" &&
        entry.compact.starts_with("ods:") && needle.substr(colon + 1) == lower(entry.label))
      return &entry;
    if (colon != std::string::npos && needle.substr(0, colon + 1) == "odrl:" &&
        entry.compact.starts_with("odrl:") && needle.substr(colon + 1) == lower(entry.label))
      return &entry;
  }
  return nullptr;
}

const TermRegistryEntry& resolve_term(std::string_view text) {
  if (const auto* entry = find_term(text)) return *entry;
  throw OdsError(ErrorKind::UnknownTerm, "unknown vocabulary term '" + std::string(text) + "'");
}

const TermRegistryEntry& entry_for(Action action) {
  for (const auto& entry : term_registry())
    if (entry.action == action) return entry;
  throw OdsError(ErrorKind::UnknownTerm, "unregistered action");
}

const TermRegistryEntry& entry_for(Role role) {
  for (const auto& entry : term_registry())
    if (entry.role == role) return entry;
  throw OdsError(ErrorKind::UnknownTerm, "unregistered role");
}

}  // namespace ods
