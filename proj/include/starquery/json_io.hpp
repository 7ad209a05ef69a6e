#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "eval.hpp"
#include "factstore.hpp"

namespace starquery::io {

using nlohmann::json;

/// One match row. Missing attributes print as empty file and zero line/col.
inline json match_row(const Database& db, NodeId id) {
    const NodeRecord& n = db.node(id);
    auto attr = [&](const char* k) { auto* v = n.attr(k); return v ? *v : std::string(); };
    auto number = [&](const char* k) -> long {
        auto* v = n.attr(k);
        if (!v || v->empty()) return 0;
        try {
            return std::stol(*v);
        } catch (const std::exception&) {
            return 0;
        }
    };
    return {{"id", n.external_id}, {"kind", kind_name(n.kind)}, {"name", attr("name")},
            {"file", attr("file")}, {"line", number("line")},  {"col", number("col")}};
}

/// Matches sorted by file, line, col, then external id.
inline json match_rows(const Database& db, const std::vector<NodeId>& ids) {
    std::vector<json> rows;
    rows.reserve(ids.size());
    for (auto id : ids) rows.push_back(match_row(db, id));
    std::sort(rows.begin(), rows.end(), [](const json& a, const json& b) {
        auto key = [](const json& r) {
            return std::make_tuple(r["file"].get<std::string>(), r["line"].get<long>(), r["col"].get<long>(),
                                   r["id"].get<std::int64_t>());
        };
        return key(a) < key(b);
    });
    return json(rows);
}

/// Deterministic result document; wall time stays out so equal inputs give equal bytes.
inline json match_set(const Database& db, const std::string& query, const EvalResult& r,
                      const std::vector<std::string>& extra_warnings = {}) {
    json warnings = json::array();
    for (auto& w : extra_warnings) warnings.push_back(w);
    for (auto& w : r.warnings) warnings.push_back(w);
    return {{"query", query},
            {"count", r.matches.size()},
            {"matches", match_rows(db, r.matches)},
            {"warnings", warnings},
            {"stats",
             {{"active_domain", r.metrics.active_domain},
              {"iterations", r.metrics.iterations},
              {"rules", r.metrics.program_rules},
              {"strata", r.metrics.stratum_iterations.size()}}}};
}

inline json stats_json(const DbStats& s) {
    return {{"T", s.active_domain}, {"k", s.relation_count}, {"m", s.max_relation}};
}

inline json error_json(const std::exception& e) {
    json out = {{"error", e.what()}};
    if (auto* p = dynamic_cast<const ParseError*>(&e)) {
        out["message"] = p->message();
        out["line"] = p->pos().line;
        out["col"] = p->pos().col;
        out["offset"] = p->pos().offset;
    }
    return out;
}

/// Canonical text form shared by the CLI and the HTTP service.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace starquery::io
