#pragma once

#include <filesystem>

#include <json.hpp>

namespace qrag {

inline constexpr int kSchemaVersion = 1;

nlohmann::json read_json_file(const std::filesystem::path& path);

// Serializes with sorted keys and no indentation, so identical documents
// produce identical bytes.
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

// Checks the "schema_version" and "kind" fields of a snapshot document.
void check_snapshot_header(const nlohmann::json& doc, std::string_view kind);

}  // namespace qrag
