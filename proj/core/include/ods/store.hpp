#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ods/rebac.hpp"

namespace ods {

struct TupleFilter {
  std::optional<ObjectRef> object;
  std::optional<std::string> relation;
  std::optional<UserRef> user;
};

/// Immutable view of one committed revision.
struct StoreState {
  std::string store_id;
  std::map<std::string, AuthorizationModel> models;  // model_id -> model
  std::vector<RelationshipTuple> tuples;             // sorted, duplicate-free
  std::uint64_t revision = 0;

  const AuthorizationModel* latest_model() const {
    return models.empty() ? nullptr : &models.rbegin()->second;
  }
  bool contains(const RelationshipTuple& tuple) const;
};

/// Directory-backed store: `meta`, `models/<id>.fga.json`, and an
/// append-only `tuples.log` replayed and compacted on open. Tuple writes
/// are atomic per revision (a revision is visible only once its commit
/// marker is durable). One writer per directory, enforced with flock.
class Store {
 public:
  /// Opens (creating if needed) the store at `dir`. Throws StoreBusy when
  /// another process holds the store.
  static std::unique_ptr<Store> open(const std::filesystem::path& dir,
                                     std::string store_id = {});
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Stores a validated model under the next sequence id ("00000001", ...).
  /// Models are versioned, never deduplicated.
  std::string put_model(const AuthorizationModel& model);

  /// Atomic tuple write. Every tuple must reference the latest model;
  /// adds must be absent, deletes present.
  std::uint64_t write(std::span<const RelationshipTuple> adds,
                      std::span<const RelationshipTuple> deletes);

  std::vector<RelationshipTuple> read(const TupleFilter& filter) const;

  std::shared_ptr<const StoreState> snapshot() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  Store() = default;
  void load();
  void compact_log();
  void persist_meta();

  std::filesystem::path dir_;
  int lock_fd_ = -1;
  mutable std::mutex mutex_;
  std::shared_ptr<const StoreState> state_;
};

std::vector<RelationshipTuple> filter_tuples(const std::vector<RelationshipTuple>& tuples,
                                             const TupleFilter& filter);

}  // namespace ods
