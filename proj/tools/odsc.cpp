// odsc: policy toolchain front end.
//   validate  check a policy document against the profile rules
//   compile   lower policies to an authorization model + tuples + obligations
//   write     apply a tuple file to a store
//   check     evaluate an access query
//   serve     expose the store and check engine over HTTP

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ods/check.hpp"
#include "ods/compiler.hpp"
#include "ods/error.hpp"
#include "ods/policy_io.hpp"
#include "ods/rebac_io.hpp"
#include "ods/service.hpp"
#include "ods/store.hpp"
#include "ods/validate.hpp"

namespace {

using nlohmann::json;

constexpr int kExitDenied = 1;
constexpr int kExitError = 2;
constexpr int kExitUnreadable = 3;

std::string read_file_or_exit(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    std::exit(kExitUnreadable);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_or_exit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content)) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(kExitError);
  }
}

json diagnostics_to_json(const std::vector<ods::Diagnostic>& diagnostics) {
  json list = json::array();
  for (const auto& d : diagnostics)
    list.push_back({{"severity", ods::to_string(d.severity)},
                    {"code", d.code},
                    {"message", d.message},
                    {"path", d.path}});
  return list;
}

ods::Value parse_context_value(const std::string& text) {
  if (auto ts = ods::parse_rfc3339(text)) return ods::Value::timestamp(*ts);
  if (!text.empty() &&
      text.find_first_not_of("0123456789", text[0] == '-' ? 1 : 0) == std::string::npos)
    return ods::Value::integer(std::stoll(text));
  return ods::Value::str(text);
}

int cmd_validate(const std::string& policy_file, bool machine) {
  auto document = read_file_or_exit(policy_file);
  std::vector<ods::Diagnostic> diagnostics;
  try {
    diagnostics = ods::validate_document(document);
  } catch (const ods::OdsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  if (machine)
    std::cout << json{{"diagnostics", diagnostics_to_json(diagnostics)}}.dump() << "\n";
  else
    std::cout << ods::render(diagnostics);
  return ods::has_errors(diagnostics) ? kExitError : 0;
}

int cmd_compile(const std::vector<std::string>& policy_files, const std::string& out_model,
                const std::string& out_tuples, const std::string& out_obligations) {
  std::vector<ods::OdrlPolicy> policies;
  try {
    for (const auto& file : policy_files)
      policies.push_back(ods::parse_policy(read_file_or_exit(file)).policy);
    auto result = ods::compile_policy_set(policies);
    for (const auto& d : result.diagnostics) std::cerr << ods::render(d) << "\n";
    write_file_or_exit(out_model, ods::export_model(result.model));
    write_file_or_exit(out_tuples, ods::render_tuple_file(result.tuples, result.iri_map));
    if (!out_obligations.empty())
      write_file_or_exit(out_obligations, ods::render_obligations(result.obligations));
  } catch (const ods::OdsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}

int cmd_write(const std::string& store_dir, const std::string& tuple_file, bool machine) {
  try {
    auto tuples = ods::parse_tuple_file(read_file_or_exit(tuple_file));
    auto store = ods::Store::open(store_dir);
    auto revision = store->write(tuples, {});
    if (machine)
      std::cout << json{{"revision", revision}}.dump() << "\n";
    else
      std::cout << "revision " << revision << "\n";
  } catch (const ods::OdsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}

int cmd_put_model(const std::string& store_dir, const std::string& model_file, bool machine) {
  try {
    auto model = ods::import_model(read_file_or_exit(model_file));
    auto store = ods::Store::open(store_dir);
    auto id = store->put_model(model);
    if (machine)
      std::cout << json{{"authorization_model_id", id}}.dump() << "\n";
    else
      std::cout << "model " << id << "\n";
  } catch (const ods::OdsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}

struct CheckArgs {
  std::string store_dir;
  std::string model_file;
  std::string tuples_file;
  std::string user;
  std::string relation;
  std::string object;
  std::vector<std::string> context;
  bool machine = false;
  bool exit_zero = false;
};

int cmd_check(const CheckArgs& args) {
  try {
    ods::AuthorizationModel model;
    std::vector<ods::RelationshipTuple> tuples;
    if (!args.store_dir.empty()) {
      auto store = ods::Store::open(args.store_dir);
      auto snapshot = store->snapshot();
      const auto* latest = snapshot->latest_model();
      if (!latest) throw ods::OdsError(ods::ErrorKind::InvalidModel, "store has no model");
      model = *latest;
      tuples = snapshot->tuples;
    } else {
      model = ods::import_model(read_file_or_exit(args.model_file));
      tuples = ods::parse_tuple_file(read_file_or_exit(args.tuples_file));
    }
    ods::CheckRequest request;
    request.user = ods::UserRef::parse(args.user);
    request.relation = args.relation;
    request.object = ods::ObjectRef::parse(args.object);
    for (const auto& pair : args.context) {
      auto eq = pair.find('=');
      if (eq == std::string::npos)
        throw ods::OdsError(ods::ErrorKind::MalformedContext, "--context expects key=value");
      request.context.emplace(pair.substr(0, eq), parse_context_value(pair.substr(eq + 1)));
    }
    auto decision = ods::check(tuples, model, request);
    if (args.machine) {
      std::cout << json{{"allowed", decision.allowed},
                        {"nodes_visited", decision.nodes_visited},
                        {"cycle_detected", decision.cycle_detected},
                        {"missing_context", decision.missing_context}}
                       .dump()
                << "\n";
    } else {
      std::cout << (decision.allowed ? "allowed" : "denied");
      if (!decision.missing_context.empty()) {
        std::cout << " (missing context:";
        for (const auto& name : decision.missing_context) std::cout << " " << name;
        std::cout << ")";
      }
      std::cout << "\n";
    }
    if (args.exit_zero) return 0;
    return decision.allowed ? 0 : kExitDenied;
  } catch (const ods::OdsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_serve(int port, const std::string& store_dir) {
  ods::ServiceConfig config;
  config.listen_port = port;
  config.data_dir = store_dir;
  if (const char* token = std::getenv("ODS_SERVICE_TOKEN")) config.bearer_token = token;
  try {
    ods::Service service(std::move(config));
    std::cerr << "listening on port " << port << "\n";
    if (!service.run()) {
      std::cerr << "error: cannot listen on port " << port << "\n";
      return kExitError;
    }
  } catch (const ods::OdsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}

std::string default_store_dir() {
  const char* env = std::getenv("ODS_STORE_DIR");
  return env ? env : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ODRL data-space policy toolchain"};
  app.require_subcommand(1);

  std::string format = "text";

  auto* validate = app.add_subcommand("validate", "validate a policy document");
  std::string validate_file;
  validate->add_option("policy", validate_file, "policy document")->required();
  validate->add_option("--format", format)->check(CLI::IsMember({"text", "machine"}));

  auto* compile = app.add_subcommand("compile", "compile policies to model + tuples");
  std::vector<std::string> compile_files;
  std::string out_model, out_tuples, out_obligations;
  compile->add_option("policy", compile_files, "policy documents")->required();
  compile->add_option("--out-model", out_model, "model output file")->required();
  compile->add_option("--out-tuples", out_tuples, "tuple output file")->required();
  compile->add_option("--out-obligations", out_obligations, "obligation output file");

  auto* write = app.add_subcommand("write", "write a tuple file into a store");
  std::string write_store = default_store_dir(), write_file;
  write->add_option("--store", write_store, "store directory");
  write->add_option("tuples", write_file, "tuple file")->required();
  write->add_option("--format", format)->check(CLI::IsMember({"text", "machine"}));

  auto* put_model = app.add_subcommand("put-model", "store an authorization model");
  std::string pm_store = default_store_dir(), pm_file;
  put_model->add_option("--store", pm_store, "store directory");
  put_model->add_option("model", pm_file, "model interchange file")->required();
  put_model->add_option("--format", format)->check(CLI::IsMember({"text", "machine"}));

  auto* check = app.add_subcommand("check", "evaluate an access query");
  CheckArgs check_args;
  check_args.store_dir = default_store_dir();
  check->add_option("--store", check_args.store_dir, "store directory");
  check->add_option("--model", check_args.model_file, "model interchange file");
  check->add_option("--tuples", check_args.tuples_file, "tuple file");
  check->add_option("--user", check_args.user)->required();
  check->add_option("--relation", check_args.relation)->required();
  check->add_option("--object", check_args.object)->required();
  check->add_option("--context", check_args.context, "key=value context entries");
  check->add_flag("--exit-zero", check_args.exit_zero,
                  "always exit 0 instead of reflecting the decision");
  check->add_option("--format", format)->check(CLI::IsMember({"text", "machine"}));

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  int serve_port = 8080;
  std::string serve_store = default_store_dir();
  serve->add_option("--port", serve_port);
  serve->add_option("--store-dir", serve_store)->required(default_store_dir().empty());

  CLI11_PARSE(app, argc, argv);
  const bool machine = format == "machine";

  if (validate->parsed()) return cmd_validate(validate_file, machine);
  if (compile->parsed()) return cmd_compile(compile_files, out_model, out_tuples, out_obligations);
  if (write->parsed()) return cmd_write(write_store, write_file, machine);
  if (put_model->parsed()) return cmd_put_model(pm_store, pm_file, machine);
  if (check->parsed()) {
    if (!check_args.model_file.empty()) check_args.store_dir.clear();  // flags beat env
    if (check_args.model_file.empty() && check_args.store_dir.empty()) {
      std::cerr << "error: provide either --store or --model with --tuples\n";
      return kExitError;
    }
    check_args.machine = machine;
    return cmd_check(check_args);
  }
  if (serve->parsed()) return cmd_serve(serve_port, serve_store);
  return kExitError;
}
