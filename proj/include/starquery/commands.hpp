#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "codesearch/compiler.hpp"
#include "codesearch/parser.hpp"
#include "eval.hpp"
#include "factstore.hpp"
#include "json_io.hpp"
#include "log.hpp"
#include "starlang/parser.hpp"
#include "suggest.hpp"
#include "toyfront.hpp"

namespace starquery::commands {

namespace fs = std::filesystem;

enum ExitCode : int { Ok = 0, QueryError = 1, InputError = 2 };

/// Compiles and evaluates one query. Parse and compile failures throw.
inline io::json run_query(const Database& db, const codesearch::PredicateConfig& config, const std::string& text,
                          bool explain = false) {
    auto compiled = codesearch::compile_query(codesearch::parse_codesearch(text, &config), config);
    auto prepared = prepare(compiled.program);
    auto result = evaluate(prepared, db);
    auto doc = io::match_set(db, text, result, compiled.warnings);
    if (explain) {
        doc["explain"] = {{"program", starlang::to_string(prepared.program)},
                          {"strata", prepared.strata.strata}};
    }
    return doc;
}

/// Expands directories to the `.toy` files below them, sorted.
inline std::vector<std::string> toy_sources(const std::vector<std::string>& paths) {
    std::vector<std::string> out;
    for (auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<std::string> found;
            for (auto& e : fs::recursive_directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".toy") found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

inline int analyze(const std::vector<std::string>& paths, const std::string& out_path, std::ostream& out,
                   std::ostream& err) {
    std::vector<toy::Ast> asts;
    bool failed = false;
    for (auto& file : toy_sources(paths)) {
        try {
            asts.push_back(toy::parse_toy_file(file));
        } catch (const ParseError& e) {
            err << file << ":" << e.what() << "\n";
            failed = true;
        } catch (const Error& e) {
            err << e.what() << "\n";
            failed = true;
        }
    }
    if (failed) return QueryError;
    if (asts.empty()) err << "warning: no .toy sources found\n";

    auto built = toy::build_graph(asts);
    for (auto& w : built.warnings) err << "warning: " << w << "\n";
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        err << "cannot write " << out_path << "\n";
        return InputError;
    }
    f << serialize(built.database).dump(1) << "\n";

    std::size_t edges = 0;
    for (auto& [_, r] : built.database.binary_relations()) edges += r.size();
    out << "wrote " << out_path << ": " << built.database.size() << " nodes, " << edges << " edges\n";
    return Ok;
}

inline std::optional<std::string> read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct QueryOptions {
    std::string db_path;
    std::string query;
    std::string query_file;
    std::string config_path;
    bool explain = false;
};

inline int query(const QueryOptions& opt, std::ostream& out, std::ostream& err) {
    std::optional<Database> db;
    codesearch::PredicateConfig config = codesearch::demo_config();
    try {
        db.emplace(load_database_file(opt.db_path));
        if (!opt.config_path.empty()) config = codesearch::load_config_file(opt.config_path);
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return InputError;
    }
    std::string text = opt.query;
    if (!opt.query_file.empty()) {
        auto t = read_text(opt.query_file);
        if (!t) {
            err << "cannot open query file " << opt.query_file << "\n";
            return InputError;
        }
        text = *t;
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    }
    try {
        out << io::dump(run_query(*db, config, text, opt.explain));
    } catch (const Error& e) {
        err << e.what() << "\n";
        return QueryError;
    }
    return Ok;
}

inline int suggest(const std::string& db_path, const std::string& text, std::optional<std::size_t> cursor,
                   std::ostream& out, std::ostream& err) {
    try {
        auto db = load_database_file(db_path);
        auto ix = suggest::build_index(db);
        out << io::dump(suggest::to_json(suggest::suggest(ix, text, cursor.value_or(text.size()))));
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return InputError;
    }
    return Ok;
}

}  // namespace starquery::commands
