#include <gtest/gtest.h>

#include <deque>

#include "helpers.hpp"
#include "starquery/eval.hpp"
#include "starquery/oracle.hpp"

using namespace starquery;
using starlang::parse_starlang;

namespace {

Database chain(std::size_t n, std::vector<std::int64_t> p) {
    std::vector<std::int64_t> nodes;
    std::vector<std::pair<std::int64_t, std::int64_t>> e;
    for (std::size_t i = 0; i <= n; ++i) nodes.push_back(static_cast<std::int64_t>(i));
    for (std::size_t i = 0; i < n; ++i) e.emplace_back(i, i + 1);
    return sqtest::graph(nodes, {{"e", e}}, {{"p", p}});
}

}  // namespace

TEST(Eval, ChainTransitiveClosure) {
    const std::size_t n = 50;
    Database db = chain(n, {static_cast<std::int64_t>(n)});
    auto res = evaluate(parse_starlang("r(X) :- p(X).\nr(X) :- e(X,Y), r(Y)."), db);
    EXPECT_EQ(res.matches.size(), n + 1);
    EXPECT_LE(res.metrics.iterations, db.size());
    EXPECT_EQ(res.metrics.join_steps, res.metrics.unary_operand_joins);
}

TEST(Eval, PathExistenceExample) {
    Database db = sqtest::graph({1, 2, 3, 4}, {{"e1", {{1, 2}, {4, 3}}}, {"e2", {{2, 4}}}}, {{"t", {4}}});
    auto res = evaluate(parse_starlang("s(Y) :- e2(Y,Z), t(Z).\nq(X) :- e1(X,Y), s(Y).\n.query q."), db);
    EXPECT_EQ(sqtest::external(db, res.matches), (std::vector<std::int64_t>{1}));
}

TEST(Eval, EmptyDatabase) {
    Database db = sqtest::graph({}, {});
    auto res = evaluate(parse_starlang("r(X) :- p(X).\nr(X) :- e(X,Y), r(Y)."), db);
    EXPECT_TRUE(res.matches.empty());
    EXPECT_EQ(res.metrics.iterations, 0u);
}

TEST(Eval, EmptyBodyIsActiveDomain) {
    Database db = sqtest::graph({1, 2, 3, 4, 5}, {});
    EXPECT_EQ(evaluate(parse_starlang("p(X) :- ."), db).matches.size(), 5u);
}

TEST(Eval, UnknownSymbolsWarnAndResolveEmpty) {
    Database db = sqtest::graph({1, 2}, {});
    auto res = evaluate(parse_starlang("r(X) :- nothing(X).\nq(X) :- !r(X), e(X, Y)."), db);
    EXPECT_TRUE(res.matches.empty());
    EXPECT_EQ(res.warnings.size(), 2u);
}

TEST(Eval, NegatingEmptyIntensionalIsTrue) {
    Database db = sqtest::graph({1, 2, 3}, {});
    auto res = evaluate(parse_starlang("p(X) :- nothing(X).\nq(X) :- !p(X)."), db);
    EXPECT_EQ(res.matches.size(), 3u);
}

TEST(Eval, DisconnectedCitationIsGlobalGate) {
    Database db = sqtest::graph({1, 2, 3}, {}, {{"a", {1, 2}}, {"d", {3}}, {"empty", {}}});
    EXPECT_EQ(evaluate(parse_starlang("r(X) :- a(X), d(Z)."), db).matches.size(), 2u);
    EXPECT_EQ(evaluate(parse_starlang("r(X) :- a(X), empty(Z)."), db).matches.size(), 0u);
    EXPECT_EQ(evaluate(parse_starlang("r(X) :- a(X), !a(Z), !d(Z)."), db).matches.size(), 0u);
}

TEST(Eval, GateOpensLateInRecursion) {
    // The gate on q depends on r, which only grows in later rounds.
    Database db = chain(5, {5});
    auto res = evaluate(parse_starlang("r(X) :- p(X).\nr(X) :- e(X,Y), r(Y).\nq(X) :- r(X), r(Z), start(Z).\n"
                                       "start(X) :- e(Y, X), !hasprev(Y), r(X).\n"
                                       "hasprev(X) :- e(Y, X).\n.query q."),
                        db);
    EXPECT_EQ(res.matches.size(), 6u);
}

TEST(Eval, InvalidProgramRejected) {
    Database db = sqtest::graph({1}, {});
    EXPECT_THROW(evaluate(parse_starlang("r(X) :- e1(X,Y), e2(X,Y)."), db), ValidationError);
}

TEST(Eval, TaintRespectsSanitizerStratum) {
    // 1 -> 2 -> 3 -> 4 and 1 -> 5 -> 4; node 2 sanitizes.
    Database db = sqtest::graph({1, 2, 3, 4, 5, 6}, {{"taint", {{1, 2}, {2, 3}, {3, 4}, {1, 5}, {5, 6}}}},
                                {{"src", {1}}, {"san", {2, 5}}, {"sink", {3, 4, 6}}});
    auto prog = parse_starlang(R"(
        reach(X) :- src(X).
        reach(X) :- taint(Y, X), pass(Y).
        pass(Y) :- src(Y).
        pass(Y) :- reach(Y), !san(Y).
        result(X) :- sink(X), reach(X).
        .query result.
    )");
    auto prep = prepare(prog);
    auto strata = evaluate_incremental_strata(prep, db);
    ASSERT_GE(strata.size(), 1u);
    auto res = evaluate(prep, db);
    EXPECT_TRUE(res.matches.empty());

    // Path oracle: BFS that never expands out of a sanitizer (sources always expand).
    std::set<std::int64_t> seen{1};
    std::deque<std::int64_t> work{1};
    const std::set<std::int64_t> san{2, 5};
    const auto* t = db.binary("taint");
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        if (x != 1 && san.count(x)) continue;
        for (auto y : t->successors(*db.dense_id(x)))
            if (seen.insert(db.node(y).external_id).second) work.push_back(db.node(y).external_id);
    }
    std::vector<std::int64_t> expected;
    for (auto s : {3, 4, 6})
        if (seen.count(s)) expected.push_back(s);
    EXPECT_EQ(sqtest::external(db, res.matches), expected);
}

TEST(Eval, SingleStratumMatchesEvaluate) {
    Database db = chain(10, {10});
    auto prep = prepare(parse_starlang("r(X) :- p(X).\nr(X) :- e(X,Y), r(Y)."));
    auto strata = evaluate_incremental_strata(prep, db);
    ASSERT_EQ(strata.size(), 1u);
    EXPECT_EQ(strata[0].totals.at("r"), evaluate(prep, db).matches);
}

TEST(Eval, DifferentialAgainstOracle) {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        auto inst = oracle::random_instance(seed);
        auto res = evaluate(inst.program, inst.db);
        auto rel = oracle::evaluate_naive(oracle::from_starlang(inst.program.rules), inst.db);
        for (auto& h : starlang::rule_heads(inst.program.rules))
            ASSERT_EQ(res.relations.at(h), oracle::unary_extension(rel, h))
                << "seed " << seed << " predicate " << h << "\n"
                << starlang::to_string(inst.program);
    }
}

TEST(Eval, NormalizationPreservesSemantics) {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        auto inst = oracle::random_rule_instance(seed);
        starlang::Program p = inst.program;
        auto normalized = starlang::normalize(p.rules[0], p, {.keep_if_shaped = false});
        normalized.push_back(p.rules[1]);
        auto orig = oracle::evaluate_naive(oracle::from_starlang(inst.program.rules), inst.db);
        auto norm = oracle::evaluate_naive(oracle::from_starlang(normalized), inst.db);
        ASSERT_EQ(oracle::unary_extension(orig, "r"), oracle::unary_extension(norm, "r"))
            << "seed " << seed << "\n" << starlang::to_string(inst.program);
        starlang::Program np;
        np.rules = normalized;
        np.query = "r";
        ASSERT_EQ(evaluate(np, inst.db).matches, oracle::unary_extension(orig, "r")) << "seed " << seed;
    }
}
