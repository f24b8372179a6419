#include "ods/service.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ods/check.hpp"
#include "ods/error.hpp"
#include "ods/rebac_io.hpp"

namespace ods {

namespace {

using nlohmann::json;

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedDocument:
    case ErrorKind::MissingRequired:
    case ErrorKind::MalformedContext:
    case ErrorKind::TypeMismatch:
      return 400;
    case ErrorKind::UnknownTypeOrRelation:
      return 404;
    case ErrorKind::DuplicateAdd:
    case ErrorKind::AbsentDelete:
    case ErrorKind::StoreBusy:
      return 409;
    case ErrorKind::InvalidModel:
    case ErrorKind::ValidationFailed:
    case ErrorKind::UnsupportedConstruct:
      return 422;
    default:
      return 500;
  }
}

void reply_error(httplib::Response& res, int status, const std::string& code,
                 const std::string& message) {
  res.status = status;
  res.set_content(json{{"code", code}, {"message", message}}.dump(), "application/json");
}

void reply_error(httplib::Response& res, const OdsError& e) {
  reply_error(res, status_for(e.kind()), to_string(e.kind()), e.message());
}

Value value_from_json(const json& node) {
  if (node.is_string()) {
    auto text = node.get<std::string>();
    if (auto ts = parse_rfc3339(text)) return Value::timestamp(*ts);
    return Value::str(std::move(text));
  }
  if (node.is_number_integer()) return Value::integer(node.get<std::int64_t>());
  if (node.is_array()) {
    std::vector<std::string> items;
    for (const auto& item : node) items.push_back(item.get<std::string>());
    return Value::strings(std::move(items));
  }
  throw OdsError(ErrorKind::MalformedContext, "unsupported context value");
}

RelationshipTuple tuple_from_json(const json& node) {
  RelationshipTuple tuple;
  tuple.user = UserRef::parse(node.at("user").get<std::string>());
  tuple.relation = node.at("relation").get<std::string>();
  tuple.object = ObjectRef::parse(node.at("object").get<std::string>());
  if (node.contains("condition") && !node.at("condition").is_null()) {
    ConditionRef cond;
    cond.name = node.at("condition").at("name").get<std::string>();
    if (node.at("condition").contains("context"))
      for (const auto& [key, value] : node.at("condition").at("context").items())
        cond.context.emplace(key, value_from_json(value));
    tuple.condition = std::move(cond);
  }
  return tuple;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object())
    throw OdsError(ErrorKind::MalformedDocument, "request body is not an object");
  return body;
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  std::mutex stores_mutex;
  std::map<std::string, std::unique_ptr<Store>> stores;
  std::map<std::string, std::string> store_names;
  std::unique_ptr<std::counting_semaphore<>> check_slots;
  std::thread thread;

  Store* find_store(const std::string& id) {
    std::lock_guard lock(stores_mutex);
    auto it = stores.find(id);
    return it == stores.end() ? nullptr : it->second.get();
  }

  void load_existing() {
    if (!std::filesystem::exists(config.data_dir)) return;
    for (const auto& entry : std::filesystem::directory_iterator(config.data_dir)) {
      if (!entry.is_directory()) continue;
      auto id = entry.path().filename().string();
      std::string name = id;
      if (std::ifstream in(entry.path() / "name"); in) std::getline(in, name);
      stores.emplace(id, Store::open(entry.path(), id));
      store_names.emplace(id, name);
    }
  }

  std::pair<std::string, std::string> create_store(const std::string& name) {
    std::lock_guard lock(stores_mutex);
    char id[16];
    std::snprintf(id, sizeof(id), "%08zu", stores.size() + 1);
    auto dir = config.data_dir / id;
    auto store = Store::open(dir, id);
    std::ofstream(dir / "name") << name << "\n";
    stores.emplace(id, std::move(store));
    store_names.emplace(id, name);
    return {id, name};
  }

  bool authorized(const httplib::Request& req) const {
    if (config.bearer_token.empty()) return true;
    return req.get_header_value("Authorization") == "Bearer " + config.bearer_token;
  }

  void route();
};

void Service::Impl::route() {
  server.set_payload_max_length(config.request_body_limit);

  server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req)) {
      reply_error(res, 401, "unauthenticated", "missing or invalid bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  server.Post("/stores", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      auto body = parse_body(req);
      auto name = body.value("name", "");
      if (name.empty()) throw OdsError(ErrorKind::MissingRequired, "store name is required");
      auto [id, stored_name] = create_store(name);
      res.status = 201;
      res.set_content(json{{"id", id}, {"name", stored_name}}.dump(), "application/json");
    } catch (const OdsError& e) {
      reply_error(res, e);
    }
  });

  server.Post(R"(/stores/([^/]+)/authorization-models)",
              [this](const httplib::Request& req, httplib::Response& res) {
                try {
                  auto* store = find_store(req.matches[1]);
                  if (!store) {
                    reply_error(res, 404, "store_not_found", "unknown store");
                    return;
                  }
                  auto model = import_model(req.body);
                  auto id = store->put_model(model);
                  res.set_content(json{{"authorization_model_id", id}}.dump(),
                                  "application/json");
                } catch (const OdsError& e) {
                  reply_error(res, e);
                }
              });

  server.Post(R"(/stores/([^/]+)/write)",
              [this](const httplib::Request& req, httplib::Response& res) {
                try {
                  auto* store = find_store(req.matches[1]);
                  if (!store) {
                    reply_error(res, 404, "store_not_found", "unknown store");
                    return;
                  }
                  auto body = parse_body(req);
                  std::vector<RelationshipTuple> adds, deletes;
                  if (body.contains("writes"))
                    for (const auto& node : body.at("writes").value("tuple_keys", json::array()))
                      adds.push_back(tuple_from_json(node));
                  if (body.contains("deletes"))
                    for (const auto& node : body.at("deletes").value("tuple_keys", json::array()))
                      deletes.push_back(tuple_from_json(node));
                  store->write(adds, deletes);
                  res.set_content("{}", "application/json");
                } catch (const OdsError& e) {
                  reply_error(res, e);
                } catch (const json::exception& e) {
                  reply_error(res, 400, "malformed_request", e.what());
                }
              });

  server.Post(R"(/stores/([^/]+)/check)",
              [this](const httplib::Request& req, httplib::Response& res) {
                check_slots->acquire();
                struct Release {
                  std::counting_semaphore<>* slots;
                  ~Release() { slots->release(); }
                } release{check_slots.get()};
                try {
                  auto* store = find_store(req.matches[1]);
                  if (!store) {
                    reply_error(res, 404, "store_not_found", "unknown store");
                    return;
                  }
                  auto snapshot = store->snapshot();
                  const auto* model = snapshot->latest_model();
                  if (!model) {
                    reply_error(res, 404, "model_not_found",
                                "store has no authorization model");
                    return;
                  }
                  auto body = parse_body(req);
                  if (!body.contains("tuple_key"))
                    throw OdsError(ErrorKind::MissingRequired, "tuple_key is required");
                  const auto& key = body.at("tuple_key");
                  CheckRequest request;
                  request.user = UserRef::parse(key.at("user").get<std::string>());
                  request.relation = key.at("relation").get<std::string>();
                  request.object = ObjectRef::parse(key.at("object").get<std::string>());
                  if (body.contains("context"))
                    for (const auto& [k, v] : body.at("context").items())
                      request.context.emplace(k, value_from_json(v));
                  if (body.contains("contextual_tuples"))
                    for (const auto& node :
                         body.at("contextual_tuples").value("tuple_keys", json::array()))
                      request.contextual_tuples.push_back(tuple_from_json(node));
                  auto decision = check(snapshot->tuples, *model, request);
                  res.set_content(json{{"allowed", decision.allowed}}.dump(),
                                  "application/json");
                } catch (const OdsError& e) {
                  reply_error(res, e);
                } catch (const json::exception& e) {
                  reply_error(res, 400, "malformed_request", e.what());
                }
              });

  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty())
      reply_error(res, res.status ? res.status : 404, "not_found",
                  "this service exposes only store creation, model upload, write and check");
  });
}

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  if (config.request_body_limit == 0 || config.max_concurrent_checks <= 0)
    throw OdsError(ErrorKind::MalformedDocument, "service limits must be strictly positive");
  impl_->config = std::move(config);
  std::filesystem::create_directories(impl_->config.data_dir);
  impl_->check_slots =
      std::make_unique<std::counting_semaphore<>>(impl_->config.max_concurrent_checks);
  impl_->load_existing();
  impl_->route();
}

Service::~Service() { stop(); }

bool Service::run() {
  return impl_->server.listen("0.0.0.0", impl_->config.listen_port);
}

int Service::start_async() {
  int port = impl_->server.bind_to_any_port("127.0.0.1");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ods
