#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "ods/store.hpp"

namespace ods {

struct ServiceConfig {
  int listen_port = 8080;
  std::filesystem::path data_dir;
  std::size_t request_body_limit = 1 << 20;
  int max_concurrent_checks = 64;
  std::string bearer_token;  // empty = no authentication
};

/// OpenFGA-API-shaped subset: create store, put authorization model, write
/// tuples, check. Everything else is 404. Checks run on snapshots; writes
/// go through each store's single-writer contract.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  /// Blocks until stop() is called. Returns false if the port cannot be bound.
  bool run();
  /// Binds to an ephemeral port and serves on a background thread.
  /// Returns the bound port.
  int start_async();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ods
