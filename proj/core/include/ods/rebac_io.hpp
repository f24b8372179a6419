#pragma once

#include <string>
#include <string_view>

#include "ods/rebac.hpp"

namespace ods {

/// Canonical interchange export (schema version 1.1 structure, two-space
/// indent, sorted names, trailing newline). Throws InvalidModel when
/// validate_model reports errors.
std::string export_model(const AuthorizationModel& model);

/// Inverse of export_model; also accepts externally authored interchange.
/// Throws MalformedDocument or InvalidModel.
AuthorizationModel import_model(std::string_view document);

/// `<param> <op> <literal>` rendering of a condition predicate, e.g.
/// `current_time <= 2026-01-01T00:00:00Z` or `purpose in ["research"]`.
std::string render_condition_expression(const Constraint& predicate);
Constraint parse_condition_expression(std::string_view expression);

}  // namespace ods
