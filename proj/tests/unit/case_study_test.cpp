#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"
#include "starquery/commands.hpp"

using namespace starquery;

namespace {

struct Case {
    std::string name, graph, source, query;
    std::vector<std::int64_t> expected, rejected;
    std::vector<long> lines;
};

std::vector<Case> manifest() {
    std::ifstream in(sqtest::source_path("fixtures/cases/manifest.json"));
    auto doc = nlohmann::json::parse(in);
    std::vector<Case> out;
    for (auto& c : doc["cases"])
        out.push_back({c["name"], c["graph"], c["source"], c["query"], c["expected"],
                       c.value("rejected", std::vector<std::int64_t>{}), c["expected_lines"]});
    return out;
}

codesearch::PredicateConfig manifest_config() {
    return codesearch::load_config_file(sqtest::source_path("fixtures/demo_config.json"));
}

}  // namespace

TEST(CaseStudy, ManifestCoversFiveStudies) {
    auto cases = manifest();
    ASSERT_EQ(cases.size(), 5u);
    for (auto& c : cases) {
        EXPECT_TRUE(std::filesystem::exists(sqtest::source_path("fixtures/cases/" + c.graph))) << c.name;
        EXPECT_TRUE(std::filesystem::exists(sqtest::source_path("fixtures/cases/" + c.source))) << c.name;
        EXPECT_EQ(c.expected.size(), c.lines.size()) << c.name;
    }
}

TEST(CaseStudy, QueriesMatchExpectedNodes) {
    auto config = manifest_config();
    for (auto& c : manifest()) {
        SCOPED_TRACE(c.name);
        auto db = load_database_file(sqtest::source_path("fixtures/cases/" + c.graph));
        auto doc = commands::run_query(db, config, c.query);
        std::vector<std::int64_t> ids;
        std::vector<long> lines;
        for (auto& m : doc["matches"]) {
            ids.push_back(m["id"]);
            lines.push_back(m["line"]);
        }
        auto sorted = ids;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(sorted, c.expected);
        EXPECT_EQ(lines, c.lines);
        for (auto r : c.rejected) EXPECT_EQ(std::count(ids.begin(), ids.end(), r), 0);
        EXPECT_TRUE(doc["warnings"].empty()) << doc["warnings"].dump();
    }
}

TEST(CaseStudy, MatchesPointAtSourceText) {
    for (auto& c : manifest()) {
        SCOPED_TRACE(c.name);
        auto db = load_database_file(sqtest::source_path("fixtures/cases/" + c.graph));
        std::ifstream in(sqtest::source_path("fixtures/cases/" + c.source));
        std::vector<std::string> src;
        for (std::string line; std::getline(in, line);) src.push_back(line);
        for (auto& n : db.nodes()) {
            auto* line = n.attr("line");
            if (!line) continue;
            std::size_t l = std::stoul(*line), col = std::stoul(*n.attr("col"));
            ASSERT_LE(l, src.size());
            ASSERT_LE(col, src[l - 1].size()) << n.external_id;
        }
    }
}

TEST(CaseStudy, SanitizerBlocksInjection) {
    auto config = manifest_config();
    config.predicates["SqliSanitizer"] = {std::nullopt, "CallExpression<\"ProductFactory.GenQuery\">"};
    auto db = load_database_file(sqtest::source_path("fixtures/cases/sqli/graph.json"));
    auto doc = commands::run_query(db, config, "Taint<PRED:AnySource, PRED:SqliSanitizer, PRED:SqliSink>");
    EXPECT_EQ(doc["count"], 0);
}

TEST(CaseStudy, LeakQueryWithoutNegationMatchesBoth) {
    auto db = load_database_file(sqtest::source_path("fixtures/cases/leak/graph.json"));
    auto doc = commands::run_query(db, manifest_config(), "CallExpression<\"java.io.FileInputStream\">");
    EXPECT_EQ(doc["count"], 2);
}
