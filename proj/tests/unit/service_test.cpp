#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "helpers.hpp"
#include "starquery/service.hpp"

using namespace starquery;
using nlohmann::json;

namespace {

const std::string kReadAfterClose = R"(CallExpression<"read"> and HasArg0<DataFlowAfter<Arg0In<CallExpression<"close">>>>)";

/// In-process server on a free port.
class Running {
public:
    explicit Running(Database db) : service_(std::move(db), codesearch::demo_config(), STARQUERY_SOURCE_DIR) {
        service_.mount(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~Running() {
        server_.stop();
        thread_.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30, 0);
        return c;
    }

private:
    service::Service service_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string snippet2_facts() {
    auto path = sqtest::temp_dir("svc") / "facts.json";
    auto r = sqtest::run_cli({"analyze", sqtest::source_path("fixtures/toy/snippet2.toy"), "--out", path.string()});
    EXPECT_EQ(r.status, 0);
    return path.string();
}

std::string query_body(const std::string& q) { return json{{"query", q}}.dump(); }

}  // namespace

TEST(Service, QueryReturnsOneMatch) {
    Running s(load_database_file(snippet2_facts()));
    auto res = s.client().Post("/query", query_body(kReadAfterClose), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    auto doc = json::parse(res->body);
    ASSERT_EQ(doc["count"], 1);
    EXPECT_EQ(doc["matches"][0]["name"], "read");
    EXPECT_EQ(doc["matches"][0]["line"], 2);
}

TEST(Service, ErrorsAreJsonWithStatus) {
    Running s(load_database_file(snippet2_facts()));
    auto c = s.client();
    auto bad = c.Post("/query", query_body("CallExpression<\"read\""), "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    auto doc = json::parse(bad->body);
    EXPECT_EQ(doc["line"], 1);
    EXPECT_EQ(doc["col"], 22);
    EXPECT_TRUE(doc.contains("error"));

    EXPECT_EQ(c.Post("/query", "{nope", "application/json")->status, 400);
    EXPECT_EQ(c.Post("/query", R"({"q":"Any"})", "application/json")->status, 400);
    auto missing = c.Get("/nowhere");
    EXPECT_EQ(missing->status, 404);
    EXPECT_TRUE(json::parse(missing->body).contains("error"));
    EXPECT_EQ(c.Get("/suggest?q=a&cursor=x")->status, 400);
    EXPECT_EQ(c.Get("/source?file=/etc/passwd")->status, 404);
    EXPECT_EQ(c.Get("/source")->status, 400);
}

TEST(Service, StatsOnCounterexample) {
    Running s(sqtest::db_from(R"({"nodes":[{"id":1,"kind":"Other"},{"id":2,"kind":"Other"},{"id":3,"kind":"Other"},
        {"id":7,"kind":"Other"}],"binary":{"e1":[[1,2],[3,2]],"e2":[[1,2],[3,7]]}})"));
    auto res = s.client().Get("/stats");
    ASSERT_TRUE(res);
    EXPECT_EQ(json::parse(res->body), (json{{"T", 4}, {"k", 2}, {"m", 2}}));
}

TEST(Service, SuggestAndSource) {
    auto facts = snippet2_facts();
    Running s(load_database_file(facts));
    auto c = s.client();
    auto sug = c.Get("/suggest?q=CallExpression%3C&cursor=15");
    ASSERT_TRUE(sug);
    EXPECT_EQ(sug->status, 200);
    auto doc = json::parse(sug->body);
    EXPECT_EQ(doc["context"], "literal-argument");
    EXPECT_FALSE(doc["suggestions"].empty());

    auto file = load_database_file(facts).nodes_of_kind(NodeKind::File).sorted();
    ASSERT_EQ(file.size(), 1u);
    std::string path = *load_database_file(facts).node(file[0]).attr("name");
    auto src = c.Get("/source", httplib::Params{{"file", path}}, httplib::Headers{});
    ASSERT_TRUE(src);
    EXPECT_EQ(src->status, 200);
    EXPECT_NE(src->body.find("f.read()"), std::string::npos);
}

TEST(Service, ByteIdenticalToCli) {
    auto facts = snippet2_facts();
    Running s(load_database_file(facts));
    for (std::string q : {kReadAfterClose, std::string("not Any"), std::string("CallExpression<*> or Identifier<f>")}) {
        auto cli = sqtest::run_cli({"query", "--db", facts, "--query", q});
        auto http = s.client().Post("/query", query_body(q), "application/json");
        ASSERT_TRUE(http);
        EXPECT_EQ(cli.out, http->body) << q;
    }
    auto cli = sqtest::run_cli({"suggest", "--db", facts, "--query", "CallExpression<", "--cursor", "15"});
    auto http = s.client().Get("/suggest?q=CallExpression%3C&cursor=15");
    EXPECT_EQ(cli.out, http->body);
}

TEST(Service, ConcurrentQueriesMatchSequential) {
    Running s(load_database_file(snippet2_facts()));
    std::vector<std::string> queries = {kReadAfterClose,
                                        "CallExpression<*>",
                                        "DataFlowAfter<CallExpression<file>>",
                                        "not Identifier<~\"^f\">",
                                        "ForSameObject<Identifier<f>> and not CallExpression<*>",
                                        "Arg0In<CallExpression<close>> or Param1In<func>",
                                        "HasArg0<Any>",
                                        "CallExpression<~\"re\"> and not CallExpression<read>"};
    std::vector<std::string> baseline;
    for (auto& q : queries) baseline.push_back(s.client().Post("/query", query_body(q), "application/json")->body);

    for (int round = 0; round < 3; ++round) {
        std::vector<std::future<std::string>> futures;
        for (auto& q : queries)
            futures.push_back(std::async(std::launch::async, [&s, q] {
                auto res = s.client().Post("/query", query_body(q), "application/json");
                return res ? res->body : std::string("<no response>");
            }));
        for (std::size_t i = 0; i < queries.size(); ++i) EXPECT_EQ(futures[i].get(), baseline[i]) << queries[i];
    }
}
