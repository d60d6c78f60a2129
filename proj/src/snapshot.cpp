#include "qrag/snapshot.hpp"

#include <fstream>

#include "qrag/error.hpp"

namespace qrag {

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return doc;
}

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump() << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

void check_snapshot_header(const nlohmann::json& doc, std::string_view kind) {
    if (!doc.is_object() || !doc.contains("schema_version") ||
        doc["schema_version"].get<int>() != kSchemaVersion) {
        throw ValidationError("snapshot: unsupported schema version");
    }
    if (!doc.contains("kind") || doc["kind"].get<std::string>() != kind) {
        throw ValidationError("snapshot: expected kind '" + std::string(kind) + "'");
    }
}

}  // namespace qrag
