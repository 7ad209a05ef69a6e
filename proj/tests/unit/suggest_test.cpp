#include <gtest/gtest.h>

#include "helpers.hpp"
#include "starquery/codesearch/compiler.hpp"
#include "starquery/codesearch/parser.hpp"
#include "starquery/eval.hpp"
#include "starquery/suggest.hpp"
#include "starquery/toyfront.hpp"

using namespace starquery;
using suggest::Context;
using suggest::SuggestionKind;

namespace {

Database snippet1() {
    return toy::build_graph({toy::parse_toy_file(sqtest::source_path("fixtures/toy/snippet1.toy"))}).database;
}

std::vector<std::string> texts(const suggest::SuggestionList& s, std::size_t n = 1000) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.items.size() && i < n; ++i) out.push_back(s.items[i].text);
    return out;
}

suggest::SuggestionList at_end(const suggest::SuggestionIndex& ix, const std::string& q) {
    return suggest::suggest(ix, q, q.size());
}

std::size_t count_matches(const Database& db, const std::string& q) {
    return evaluate(codesearch::compile(codesearch::parse_codesearch(q)), db).matches.size();
}

}  // namespace

TEST(Suggest, IndexCountsCallNames) {
    auto ix = suggest::build_index(snippet1());
    EXPECT_EQ(ix.call_names, (suggest::Counts{{"close", 1}, {"file", 1}, {"read", 1}}));
    EXPECT_EQ(ix.stdlib_evidence.at("CallExpression"), 3u);
    EXPECT_EQ(ix.stdlib_evidence.at("None"), 0u);
}

TEST(Suggest, CalleeArgumentListsCallsFirst) {
    auto ix = suggest::build_index(snippet1());
    auto s = at_end(ix, "CallExpression<");
    EXPECT_EQ(s.context, Context::LiteralArgument);
    EXPECT_EQ(s.template_name, "CallExpression");
    auto top = texts(s, 3);
    std::sort(top.begin(), top.end());
    EXPECT_EQ(top, (std::vector<std::string>{"close", "file", "read"}));
    for (auto& i : s.items) EXPECT_EQ(i.kind, SuggestionKind::Literal);
}

TEST(Suggest, PrefixFilters) {
    auto ix = suggest::build_index(snippet1());
    auto s = at_end(ix, "CallExpression<re");
    ASSERT_FALSE(s.items.empty());
    EXPECT_EQ(s.items[0].text, "read");
    EXPECT_EQ(s.prefix, "re");
    EXPECT_EQ(s.replace_from, 15u);

    auto quoted = at_end(ix, "CallExpression<\"cl");
    ASSERT_EQ(texts(quoted), std::vector<std::string>{"close"});
    EXPECT_EQ(quoted.items[0].insert, "\"close\"");
}

TEST(Suggest, AfterConnectiveOffersNoLiterals) {
    auto ix = suggest::build_index(snippet1());
    auto s = at_end(ix, "CallExpression<read> and ");
    EXPECT_EQ(s.context, Context::Operand);
    ASSERT_FALSE(s.items.empty());
    for (auto& i : s.items) EXPECT_NE(i.kind, SuggestionKind::Literal) << i.text;
    EXPECT_EQ(s.items[0].evidence, ix.active_domain);
}

TEST(Suggest, ConnectivePosition) {
    auto ix = suggest::build_index(snippet1());
    auto s = at_end(ix, "CallExpression<read> ");
    EXPECT_EQ(s.context, Context::Connective);
    EXPECT_EQ(texts(s), (std::vector<std::string>{"and", "or"}));
    EXPECT_EQ(texts(at_end(ix, "CallExpression<read> o")), std::vector<std::string>{"or"});
}

TEST(Suggest, PredicateCitation) {
    auto ix = suggest::build_index(snippet1());
    auto s = at_end(ix, "not PRED:So");
    EXPECT_EQ(s.context, Context::PredicateName);
    ASSERT_FALSE(s.items.empty());
    for (auto& i : s.items) {
        EXPECT_EQ(i.kind, SuggestionKind::Predicate);
        EXPECT_EQ(i.text.rfind("So", 0), 0u);
        EXPECT_EQ(i.insert, "PRED:" + i.text);
    }
    EXPECT_EQ(s.replace_from, 4u);
}

TEST(Suggest, NestedArgumentPosition) {
    auto ix = suggest::build_index(snippet1());
    auto s = at_end(ix, "DataFlowAfter<CallExpression<close>> and HasAnnotation<");
    EXPECT_EQ(s.template_name, "HasAnnotation");
    EXPECT_EQ(s.param, codesearch::ParamKind::Annotation);
    EXPECT_TRUE(s.items.empty());

    auto q = at_end(ix, "Arg0In<CallExpression<close>, ");
    EXPECT_EQ(q.context, Context::Operand);
}

TEST(Suggest, EmptyDatabaseAndEmptyText) {
    auto ix = suggest::build_index(DatabaseBuilder{}.build());
    auto s = suggest::suggest(ix, "", 0);
    EXPECT_EQ(s.context, Context::Operand);
    EXPECT_EQ(s.items.size(), codesearch::stdlib().size());
    for (auto& i : s.items) EXPECT_EQ(i.evidence, 0u);
    EXPECT_TRUE(std::is_sorted(s.items.begin(), s.items.end(),
                               [](auto& a, auto& b) { return a.text < b.text; }));
    EXPECT_TRUE(at_end(ix, "CallExpression<").items.empty());
}

TEST(Suggest, CursorInsideText) {
    auto ix = suggest::build_index(snippet1());
    std::string q = "CallExpression<r> and Taint<a, b, c>";
    auto s = suggest::suggest(ix, q, 16);
    EXPECT_EQ(s.prefix, "r");
    EXPECT_EQ(texts(s), std::vector<std::string>{"read"});
}

TEST(Suggest, StableAndEvaluationFree) {
    auto db = snippet1();
    auto before = evaluation_counter().load();
    auto ix = suggest::build_index(db);
    for (std::string q : {"", "Call", "CallExpression<", "CallExpression<c", "a and ", "PRED:", "not (", "Taint<a, "})
        EXPECT_EQ(at_end(ix, q), at_end(ix, q));
    EXPECT_EQ(evaluation_counter().load(), before);
    EXPECT_EQ(suggest::build_index(db), ix);
}

TEST(Suggest, LiteralEvidenceIsExact) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto db = sqtest::random_code_graph(seed);
        auto ix = suggest::build_index(db);
        for (auto& i : at_end(ix, "CallExpression<").items)
            EXPECT_EQ(i.evidence, count_matches(db, "CallExpression<" + i.insert + ">")) << seed << " " << i.text;
        for (auto& i : at_end(ix, "HasAnnotation<").items)
            EXPECT_EQ(i.evidence, count_matches(db, "HasAnnotation<" + i.insert + ">")) << seed << " " << i.text;
    }
}

TEST(Suggest, TemplateEvidenceImpliesMatches) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto db = sqtest::random_code_graph(seed);
        auto ix = suggest::build_index(db);
        for (auto& e : codesearch::stdlib()) {
            if (!e.is_template() || e.arity() != 1 || e.name == "Not") continue;
            std::size_t n = count_matches(db, e.name + "<*>");
            if (ix.stdlib_evidence.at(e.name) > 0) EXPECT_GT(n, 0u) << seed << " " << e.name;
        }
    }
}
