#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "starquery/commands.hpp"
#include "starquery/service.hpp"

namespace cmd = starquery::commands;

static int serve(const std::string& db_path, const std::string& config_path, const std::string& bind) {
    std::optional<starquery::service::Service> svc;
    try {
        auto db = starquery::load_database_file(db_path);
        auto config = config_path.empty() ? starquery::codesearch::demo_config()
                                          : starquery::codesearch::load_config_file(config_path);
        auto root = std::filesystem::absolute(db_path).parent_path();
        svc.emplace(std::move(db), std::move(config), root);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return cmd::InputError;
    }

    std::string host;
    int port = 0;
    try {
        std::tie(host, port) = starquery::service::parse_bind(bind);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return cmd::InputError;
    }
    httplib::Server server;
    svc->mount(server);
    if (port == 0) port = server.bind_to_any_port(host);
    else if (!server.bind_to_port(host, port)) port = -1;
    if (port < 0) {
        std::cerr << "cannot bind " << bind << "\n";
        return cmd::InputError;
    }
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    starquery::logger().info("serving {} ({} nodes)", db_path, svc->database().size());
    return server.listen_after_bind() ? cmd::Ok : cmd::InputError;
}

int main(int argc, char** argv) {
    CLI::App app{"starquery: Codesearch queries over program-analysis graphs"};
    app.require_subcommand(1);

    std::vector<std::string> paths;
    std::string out_path = "facts.json";
    auto* analyze = app.add_subcommand("analyze", "Build a facts file from .toy sources");
    analyze->add_option("paths", paths, ".toy files or directories")->required();
    analyze->add_option("--out", out_path, "facts file to write")->capture_default_str();

    cmd::QueryOptions q;
    auto* query = app.add_subcommand("query", "Run a Codesearch query");
    query->add_option("--db", q.db_path, "facts file")->required();
    auto* text = query->add_option("--query", q.query, "query text");
    auto* file = query->add_option("--query-file", q.query_file, "file holding the query");
    text->excludes(file);
    query->add_option("--config", q.config_path, "predicate configuration (JSON)");
    query->add_flag("--explain", q.explain, "include the compiled program and its strata");

    std::string sdb, stext;
    std::optional<std::size_t> cursor;
    auto* sugg = app.add_subcommand("suggest", "Autocomplete a partial query");
    sugg->add_option("--db", sdb, "facts file")->required();
    sugg->add_option("--query", stext, "partial query text");
    sugg->add_option("--cursor", cursor, "byte offset of the cursor (default: end)");

    std::string vdb, vconfig, bind = "127.0.0.1:8080";
    auto* srv = app.add_subcommand("serve", "Serve the JSON API");
    srv->add_option("--db", vdb, "facts file")->required();
    srv->add_option("--config", vconfig, "predicate configuration (JSON)");
    srv->add_option("--bind", bind, "host:port (port 0 picks a free one)")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (*analyze) return cmd::analyze(paths, out_path, std::cout, std::cerr);
    if (*query) {
        if (!*text && !*file) {
            std::cerr << "query: one of --query or --query-file is required\n";
            return cmd::QueryError;
        }
        return cmd::query(q, std::cout, std::cerr);
    }
    if (*sugg) return cmd::suggest(sdb, stext, cursor, std::cout, std::cerr);
    return serve(vdb, vconfig, bind);
}
