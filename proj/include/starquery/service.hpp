#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>

#include <httplib.h>

#include "commands.hpp"
#include "json_io.hpp"
#include "log.hpp"
#include "suggest.hpp"

namespace starquery::service {

namespace fs = std::filesystem;
using io::json;

/// Read-only state shared by every request.
class Service {
public:
    static constexpr std::size_t kWorkers = 16;

    Service(Database db, codesearch::PredicateConfig config, fs::path source_root = fs::current_path())
        : db_(std::move(db)), config_(std::move(config)), root_(std::move(source_root)), index_(suggest::build_index(db_)) {
        for (auto& n : db_.nodes()) {
            if (auto* f = n.attr("file")) files_.insert(*f);
            if (n.kind == NodeKind::File)
                if (auto* f = n.attr("name")) files_.insert(*f);
        }
    }

    const Database& database() const { return db_; }

    void mount(httplib::Server& server) const {
        server.new_task_queue = [] { return new httplib::ThreadPool(kWorkers); };
        server.set_keep_alive_max_count(16);
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server.Post("/query", [this](const httplib::Request& req, httplib::Response& res) { on_query(req, res); });
        server.Get("/suggest", [this](const httplib::Request& req, httplib::Response& res) { on_suggest(req, res); });
        server.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, io::stats_json(db_stats(db_)));
        });
        server.Get("/source", [this](const httplib::Request& req, httplib::Response& res) { on_source(req, res); });
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            reply(res, 500, {{"error", what}});
        });
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) reply(res, res.status, {{"error", httplib::status_message(res.status)}});
        });
    }

private:
    Database db_;
    codesearch::PredicateConfig config_;
    fs::path root_;
    suggest::SuggestionIndex index_;
    std::set<std::string> files_;

    static void reply(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(io::dump(body), "application/json");
    }

    void on_query(const httplib::Request& req, httplib::Response& res) const {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("query") || !body["query"].is_string())
            return reply(res, 400, {{"error", "expected a JSON object with a string \"query\""}});
        bool explain = body.value("explain", false);
        try {
            reply(res, 200, commands::run_query(db_, config_, body["query"].get<std::string>(), explain));
        } catch (const Error& e) {
            reply(res, 400, io::error_json(e));
        }
    }

    void on_suggest(const httplib::Request& req, httplib::Response& res) const {
        std::string q = req.get_param_value("q");
        std::size_t cursor = q.size();
        if (req.has_param("cursor")) {
            try {
                std::size_t used = 0;
                auto s = req.get_param_value("cursor");
                cursor = std::stoul(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
            } catch (const std::exception&) {
                return reply(res, 400, {{"error", "cursor must be a non-negative integer"}});
            }
        }
        reply(res, 200, suggest::to_json(suggest::suggest(index_, q, cursor)));
    }

    void on_source(const httplib::Request& req, httplib::Response& res) const {
        std::string file = req.get_param_value("file");
        if (file.empty()) return reply(res, 400, {{"error", "missing file parameter"}});
        if (!files_.count(file)) return reply(res, 404, {{"error", "unknown file '" + file + "'"}});
        fs::path p(file);
        if (!fs::exists(p)) p = root_ / file;
        auto text = commands::read_text(p.string());
        if (!text) return reply(res, 404, {{"error", "cannot read '" + file + "'"}});
        res.status = 200;
        res.set_content(*text, "text/plain; charset=utf-8");
    }
};

/// Splits "host:port"; a bare port binds localhost.
inline std::pair<std::string, int> parse_bind(const std::string& bind) {
    auto colon = bind.rfind(':');
    std::string host = colon == std::string::npos ? "127.0.0.1" : bind.substr(0, colon);
    std::string port = colon == std::string::npos ? bind : bind.substr(colon + 1);
    if (host.empty()) host = "127.0.0.1";
    std::size_t used = 0;
    int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::invalid_argument("bad port in '" + bind + "'");
    return {host, p};
}

}  // namespace starquery::service
