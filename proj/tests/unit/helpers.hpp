#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "starquery/factstore.hpp"

namespace sqtest {

inline starquery::Database db_from(const std::string& json_text) { return starquery::load_database(std::string_view(json_text)); }

/// Database with nodes named by external ids and no attributes beyond `name`.
inline starquery::Database graph(const std::vector<std::int64_t>& nodes,
                                 const std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>>& binary,
                                 const std::map<std::string, std::vector<std::int64_t>>& unary = {}) {
    nlohmann::json doc;
    doc["nodes"] = nlohmann::json::array();
    for (auto id : nodes) doc["nodes"].push_back({{"id", id}, {"kind", "Other"}, {"attrs", {{"name", std::to_string(id)}}}});
    doc["binary"] = nlohmann::json::object();
    for (auto& [name, pairs] : binary) {
        doc["binary"][name] = nlohmann::json::array();
        for (auto& [a, b] : pairs) doc["binary"][name].push_back({a, b});
    }
    doc["unary"] = nlohmann::json::object();
    for (auto& [name, ids] : unary) doc["unary"][name] = ids;
    return starquery::load_database(doc);
}

inline std::vector<std::int64_t> external(const starquery::Database& db, const std::vector<starquery::NodeId>& ids) {
    std::vector<std::int64_t> out;
    for (auto id : ids) out.push_back(db.node(id).external_id);
    std::sort(out.begin(), out.end());
    return out;
}

/// Small random code graph: calls, identifiers and annotations named a/b/c
/// with arg0, dataflow, taint, same_object and annotated_by edges.
inline starquery::Database random_code_graph(std::uint64_t seed, int n = 14) {
    using starquery::NodeKind;
    std::mt19937_64 rng(seed);
    auto pick = [&](int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng); };
    starquery::DatabaseBuilder b;
    const NodeKind kinds[] = {NodeKind::CallExpression, NodeKind::Identifier, NodeKind::Annotation, NodeKind::Other};
    const char* names[] = {"a", "b", "c"};
    for (int i = 0; i < n; ++i) b.add_node(kinds[pick(4)], {{"name", names[pick(3)]}});
    for (const char* rel : {"arg0", "dataflow", "taint", "annotated_by"}) {
        b.declare_binary(rel);
        for (int k = pick(n); k > 0; --k) b.add_edge(rel, pick(n), pick(n));
    }
    b.declare_binary("same_object");
    for (int i = 0; i < n; ++i) b.add_edge("same_object", i, i);
    for (int k = pick(n / 2); k > 0; --k) {
        int x = pick(n), y = pick(n);
        b.add_edge("same_object", x, y);
        b.add_edge("same_object", y, x);
    }
    return std::move(b).build();
}

inline std::string source_path(const std::string& rel) { return std::string(STARQUERY_SOURCE_DIR) + "/" + rel; }

}  // namespace sqtest

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

namespace sqtest {

struct CliRun {
    int status = -1;
    std::string out;
};

/// Runs the built CLI with a shell-quoted argument list; stderr is dropped unless merged.
inline CliRun run_cli(const std::vector<std::string>& args, bool merge_stderr = false) {
    std::string cmd = "'" + std::string(STARQUERY_CLI_PATH) + "'";
    for (auto& a : args) {
        std::string q;
        for (char c : a) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
        cmd += " '" + q + "'";
    }
    cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto p = std::filesystem::temp_directory_path() / ("starquery-" + tag + "-" + std::to_string(rng() % 1000000007));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace sqtest
