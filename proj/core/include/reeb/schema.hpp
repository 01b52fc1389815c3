#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace reeb {

// Structural JSON validation against the schema documents shipped under
// schemas/.  Supports the subset used there: type, required, properties,
// items, enum (strings), const (strings).  Returns an empty string when the
// document validates, else the first violation found.
std::string validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema);

// Locates schemas/<name>.json next to the binary's repository checkout:
// searches dir and its parents for a schemas/ folder.
std::filesystem::path find_schema_file(const std::string& name,
                                       const std::filesystem::path& hint = {});

// Validates a written artifact by its embedded "schema" field ("name/v1").
// Throws std::runtime_error on violations.
void validate_artifact(const nlohmann::json& doc, const std::filesystem::path& schema_dir);

}  // namespace reeb
