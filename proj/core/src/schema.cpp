#include "reeb/schema.hpp"

#include <fstream>

namespace reeb {

namespace {

bool type_matches(const nlohmann::json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
}

std::string check(const nlohmann::json& v, const nlohmann::json& sch, const std::string& path) {
    if (sch.contains("type")) {
        const std::string t = sch["type"].get<std::string>();
        if (!type_matches(v, t))
            return path + ": expected " + t + ", got " + std::string(v.type_name());
    }
    if (sch.contains("const")) {
        if (v != sch["const"]) return path + ": value does not match the required constant";
    }
    if (sch.contains("enum")) {
        bool found = false;
        for (const auto& e : sch["enum"])
            if (e == v) found = true;
        if (!found) return path + ": value not among the allowed alternatives";
    }
    if (v.is_object()) {
        if (sch.contains("required"))
            for (const auto& req : sch["required"])
                if (!v.contains(req.get<std::string>()))
                    return path + ": missing required member '" + req.get<std::string>() + "'";
        if (sch.contains("properties")) {
            for (auto it = sch["properties"].begin(); it != sch["properties"].end(); ++it) {
                if (!v.contains(it.key())) continue;
                const std::string err = check(v[it.key()], it.value(), path + "/" + it.key());
                if (!err.empty()) return err;
            }
        }
    }
    if (v.is_array() && sch.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string err =
                check(v[i], sch["items"], path + "[" + std::to_string(i) + "]");
            if (!err.empty()) return err;
        }
    }
    return {};
}

}  // namespace

std::string validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema) {
    return check(doc, schema, "$");
}

std::filesystem::path find_schema_file(const std::string& name,
                                       const std::filesystem::path& hint) {
    namespace fs = std::filesystem;
    std::vector<fs::path> roots;
    if (!hint.empty()) roots.push_back(hint);
    roots.push_back(fs::current_path());
    for (fs::path root : roots) {
        for (int depth = 0; depth < 6; ++depth) {
            const fs::path candidate = root / "schemas" / (name + ".json");
            if (fs::exists(candidate)) return candidate;
            if (!root.has_parent_path() || root.parent_path() == root) break;
            root = root.parent_path();
        }
    }
    throw std::runtime_error("schema file not found: " + name + ".json");
}

void validate_artifact(const nlohmann::json& doc, const std::filesystem::path& schema_dir) {
    if (!doc.contains("schema") || !doc["schema"].is_string())
        throw std::runtime_error("artifact lacks a schema tag");
    std::string tag = doc["schema"].get<std::string>();  // "name/v1"
    for (auto& c : tag)
        if (c == '/') c = '.';
    std::filesystem::path file;
    if (!schema_dir.empty() && std::filesystem::exists(schema_dir / (tag + ".json")))
        file = schema_dir / (tag + ".json");
    else
        file = find_schema_file(tag, schema_dir);
    std::ifstream in(file);
    nlohmann::json schema;
    in >> schema;
    const std::string err = validate_against_schema(doc, schema);
    if (!err.empty())
        throw std::runtime_error("artifact violates schema " + tag + ": " + err);
}

}  // namespace reeb
