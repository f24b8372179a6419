#include "ods/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ods/error.hpp"
#include "ods/rebac_io.hpp"

namespace ods {

namespace {

using nlohmann::json;

// Test hook: when ODS_STORE_CRASH_AFTER_OPS is set, the process exits hard
// after that many durable file operations, emulating a crash mid-write.
void count_op() {
  const char* env = std::getenv("ODS_STORE_CRASH_AFTER_OPS");
  if (!env) return;
  static long used = 0;
  if (++used > std::atol(env)) ::_exit(137);
}

void append_line(int fd, const std::string& line) {
  count_op();
  std::string data = line + "\n";
  ssize_t n = ::write(fd, data.data(), data.size());
  if (n != static_cast<ssize_t>(data.size()))
    throw OdsError(ErrorKind::IoError, "short write to tuple log");
}

void sync_fd(int fd) {
  count_op();
  ::fsync(fd);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw OdsError(ErrorKind::IoError, "cannot write " + tmp.string());
    count_op();
    if (::write(fd, content.data(), content.size()) != static_cast<ssize_t>(content.size())) {
      ::close(fd);
      throw OdsError(ErrorKind::IoError, "short write to " + tmp.string());
    }
    ::fsync(fd);
    ::close(fd);
  }
  count_op();
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool tuple_less(const RelationshipTuple& a, const RelationshipTuple& b) { return a < b; }

}  // namespace

bool StoreState::contains(const RelationshipTuple& tuple) const {
  return std::binary_search(tuples.begin(), tuples.end(), tuple, tuple_less);
}

std::vector<RelationshipTuple> filter_tuples(const std::vector<RelationshipTuple>& tuples,
                                             const TupleFilter& filter) {
  std::vector<RelationshipTuple> out;
  for (const auto& tuple : tuples) {
    if (filter.object && !(tuple.object == *filter.object)) continue;
    if (filter.relation && tuple.relation != *filter.relation) continue;
    if (filter.user && !(tuple.user == *filter.user)) continue;
    out.push_back(tuple);
  }
  return out;
}

std::unique_ptr<Store> Store::open(const std::filesystem::path& dir, std::string store_id) {
  std::filesystem::create_directories(dir / "models");
  auto store = std::unique_ptr<Store>(new Store);
  store->dir_ = dir;

  store->lock_fd_ = ::open((dir / "lock").c_str(), O_WRONLY | O_CREAT, 0644);
  if (store->lock_fd_ < 0)
    throw OdsError(ErrorKind::IoError, "cannot open lock file in " + dir.string());
  if (::flock(store->lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(store->lock_fd_);
    store->lock_fd_ = -1;
    throw OdsError(ErrorKind::StoreBusy, "store at " + dir.string() + " is held by another process");
  }

  auto state = std::make_shared<StoreState>();
  state->store_id = store_id.empty() ? dir.filename().string() : std::move(store_id);
  store->state_ = state;
  store->load();
  return store;
}

Store::~Store() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void Store::load() {
  auto state = std::make_shared<StoreState>(*state_);

  if (std::filesystem::exists(dir_ / "meta")) {
    json meta = json::parse(read_file(dir_ / "meta"), nullptr, false);
    if (!meta.is_discarded() && meta.is_object()) {
      state->store_id = meta.value("store_id", state->store_id);
      state->revision = meta.value("revision", std::uint64_t{0});
    }
  }

  for (const auto& entry : std::filesystem::directory_iterator(dir_ / "models")) {
    auto name = entry.path().filename().string();
    const std::string suffix = ".fga.json";
    if (name.size() <= suffix.size() || !name.ends_with(suffix)) continue;
    auto id = name.substr(0, name.size() - suffix.size());
    state->models.emplace(id, import_model(read_file(entry.path())));
  }

  // Replay only complete revisions; anything after the last commit marker
  // is a torn write and is discarded.
  if (std::filesystem::exists(dir_ / "tuples.log")) {
    std::vector<RelationshipTuple> tuples = state->tuples;
    std::vector<std::pair<bool, RelationshipTuple>> pending;  // (is_add, tuple)
    std::uint64_t log_revision = state->revision;
    std::istringstream log(read_file(dir_ / "tuples.log"));
    std::string line;
    while (std::getline(log, line)) {
      if (line.empty()) continue;
      auto first = line.find(' ');
      if (first == std::string::npos) continue;
      std::uint64_t revision = 0;
      try {
        revision = std::stoull(line.substr(0, first));
      } catch (const std::exception&) {
        continue;  // torn line
      }
      auto rest = line.substr(first + 1);
      if (rest == "COMMIT") {
        for (auto& [is_add, tuple] : pending) {
          auto it = std::lower_bound(tuples.begin(), tuples.end(), tuple, tuple_less);
          if (is_add) {
            if (it == tuples.end() || !(*it == tuple)) tuples.insert(it, std::move(tuple));
          } else if (it != tuples.end() && *it == tuple) {
            tuples.erase(it);
          }
        }
        pending.clear();
        log_revision = std::max(log_revision, revision);
        continue;
      }
      try {
        if (rest.starts_with("ADD ")) {
          pending.emplace_back(true, RelationshipTuple::parse(rest.substr(4)));
        } else if (rest.starts_with("DEL ")) {
          pending.emplace_back(false, RelationshipTuple::parse(rest.substr(4)));
        }
      } catch (const OdsError&) {
        pending.clear();  // torn tuple line invalidates the open revision
      }
    }
    state->tuples = std::move(tuples);
    state->revision = std::max(state->revision, log_revision);
  }

  {
    std::lock_guard lock(mutex_);
    state_ = std::move(state);
  }
  compact_log();
  persist_meta();
}

void Store::compact_log() {
  auto state = snapshot();
  std::string content;
  for (const auto& tuple : state->tuples)
    content += std::to_string(state->revision) + " ADD " + tuple.render() + "\n";
  if (!state->tuples.empty())
    content += std::to_string(state->revision) + " COMMIT\n";
  write_file_atomic(dir_ / "tuples.log", content);
}

void Store::persist_meta() {
  auto state = snapshot();
  json meta = {{"store_id", state->store_id}, {"revision", state->revision}};
  write_file_atomic(dir_ / "meta", meta.dump(2) + "\n");
}

std::string Store::put_model(const AuthorizationModel& model) {
  auto findings = validate_model(model);
  if (has_errors(findings))
    throw OdsError(ErrorKind::InvalidModel, "model fails validation: " + render(findings[0]));

  std::lock_guard lock(mutex_);
  auto state = std::make_shared<StoreState>(*state_);
  char id[16];
  std::snprintf(id, sizeof(id), "%08zu", state->models.size() + 1);
  write_file_atomic(dir_ / "models" / (std::string(id) + ".fga.json"), export_model(model));
  state->models.emplace(id, model);
  state_ = state;
  return id;
}

std::uint64_t Store::write(std::span<const RelationshipTuple> adds,
                           std::span<const RelationshipTuple> deletes) {
  std::lock_guard lock(mutex_);
  const auto* model = state_->latest_model();
  if (!model)
    throw OdsError(ErrorKind::UnknownTypeOrRelation, "store has no authorization model");

  auto check_against_model = [&](const RelationshipTuple& tuple) {
    if (!model->find_relation(tuple.object.type, tuple.relation))
      throw OdsError(ErrorKind::UnknownTypeOrRelation,
                     "no relation '" + tuple.relation + "' on type '" + tuple.object.type + "'");
    if (!model->find_type(tuple.user.object.type))
      throw OdsError(ErrorKind::UnknownTypeOrRelation,
                     "unknown subject type '" + tuple.user.object.type + "'");
    if (tuple.user.userset_relation &&
        !model->find_relation(tuple.user.object.type, *tuple.user.userset_relation))
      throw OdsError(ErrorKind::UnknownTypeOrRelation,
                     "unknown userset relation '" + *tuple.user.userset_relation + "'");
    if (tuple.condition && !model->conditions.contains(tuple.condition->name))
      throw OdsError(ErrorKind::UnknownTypeOrRelation,
                     "unknown condition '" + tuple.condition->name + "'");
  };
  for (const auto& tuple : adds) {
    check_against_model(tuple);
    if (state_->contains(tuple))
      throw OdsError(ErrorKind::DuplicateAdd, "tuple already present: " + tuple.render());
  }
  for (const auto& tuple : deletes) {
    check_against_model(tuple);
    if (!state_->contains(tuple))
      throw OdsError(ErrorKind::AbsentDelete, "tuple not present: " + tuple.render());
  }

  auto state = std::make_shared<StoreState>(*state_);
  const std::uint64_t revision = state->revision + 1;

  int fd = ::open((dir_ / "tuples.log").c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw OdsError(ErrorKind::IoError, "cannot append to tuple log");
  try {
    for (const auto& tuple : adds)
      append_line(fd, std::to_string(revision) + " ADD " + tuple.render());
    for (const auto& tuple : deletes)
      append_line(fd, std::to_string(revision) + " DEL " + tuple.render());
    append_line(fd, std::to_string(revision) + " COMMIT");
    sync_fd(fd);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);

  for (const auto& tuple : adds) {
    auto it = std::lower_bound(state->tuples.begin(), state->tuples.end(), tuple, tuple_less);
    state->tuples.insert(it, tuple);
  }
  for (const auto& tuple : deletes) {
    auto it = std::lower_bound(state->tuples.begin(), state->tuples.end(), tuple, tuple_less);
    if (it != state->tuples.end() && *it == tuple) state->tuples.erase(it);
  }
  state->revision = revision;
  state_ = state;

  json meta = {{"store_id", state->store_id}, {"revision", state->revision}};
  write_file_atomic(dir_ / "meta", meta.dump(2) + "\n");
  return revision;
}

std::vector<RelationshipTuple> Store::read(const TupleFilter& filter) const {
  return filter_tuples(snapshot()->tuples, filter);
}

std::shared_ptr<const StoreState> Store::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

}  // namespace ods
