#pragma once

#include <stdexcept>
#include <string>

namespace ods {

enum class ErrorKind {
  MalformedDocument,
  UnknownTerm,
  MissingRequired,
  InvalidModel,
  ValidationFailed,
  UnsupportedConstruct,
  MergeConflict,
  IdCollision,
  DuplicateAdd,
  AbsentDelete,
  UnknownTypeOrRelation,
  MalformedContext,
  TypeMismatch,
  StoreBusy,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedDocument: return "malformed_document";
    case ErrorKind::UnknownTerm: return "unknown_term";
    case ErrorKind::MissingRequired: return "missing_required";
    case ErrorKind::InvalidModel: return "invalid_model";
    case ErrorKind::ValidationFailed: return "validation_failed";
    case ErrorKind::UnsupportedConstruct: return "unsupported_construct";
    case ErrorKind::MergeConflict: return "merge_conflict";
    case ErrorKind::IdCollision: return "id_collision";
    case ErrorKind::DuplicateAdd: return "duplicate_add";
    case ErrorKind::AbsentDelete: return "absent_delete";
    case ErrorKind::UnknownTypeOrRelation: return "unknown_type_or_relation";
    case ErrorKind::MalformedContext: return "malformed_context";
    case ErrorKind::TypeMismatch: return "type_mismatch";
    case ErrorKind::StoreBusy: return "store_busy";
    case ErrorKind::IoError: return "io_error";
  }
  return "error";
}

/// Carrier for every typed failure in the toolchain. `path` points into the
/// offending document (slash-separated, e.g. /permission/0/action) when the
/// failure has a location.
class OdsError : public std::runtime_error {
 public:
  OdsError(ErrorKind kind, std::string message, std::string path = {})
      : std::runtime_error(path.empty() ? std::string(to_string(kind)) + ": " + message
                                        : std::string(to_string(kind)) + " at " + path + ": " +
                                              message),
        kind_(kind),
        message_(std::move(message)),
        path_(std::move(path)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }
  const std::string& path() const { return path_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::string path_;
};

}  // namespace ods
