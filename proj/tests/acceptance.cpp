// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "starquery/starquery.hpp"

using namespace starquery;
using nlohmann::json;

namespace {

// Pinned tolerances.
constexpr double kNormalizeBudgetMs = 1000;
constexpr std::size_t kEquivalenceCases = 1000;
constexpr double kEquivalenceBudgetMs = 60000;
constexpr std::size_t kDifferentialCases = 1000;
constexpr double kDifferentialBudgetMs = 60000;
constexpr double kEndToEndBudgetMs = 1000;
constexpr std::size_t kChainSizes[] = {1000, 10000, 100000};
constexpr double kMaxGrowthRatio = 20.0;
constexpr int kChainRepeats = 5;
constexpr double kScalingBudgetMs = 30000;
constexpr std::size_t kRoundTripCases = 100;
constexpr double kExpansionBudgetMs = 100;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Failure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

std::string source(const std::string& rel) { return std::string(STARQUERY_SOURCE_DIR) + "/" + rel; }

std::vector<std::int64_t> external(const Database& db, const std::vector<NodeId>& ids) {
    std::vector<std::int64_t> out;
    for (auto id : ids) out.push_back(db.node(id).external_id);
    std::sort(out.begin(), out.end());
    return out;
}

Database small_graph(const std::vector<std::int64_t>& nodes,
                     const std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>>& edges) {
    json doc = {{"nodes", json::array()}, {"binary", json::object()}};
    for (auto id : nodes) doc["nodes"].push_back({{"id", id}, {"kind", "Other"}, {"attrs", {{"name", std::to_string(id)}}}});
    for (auto& [name, pairs] : edges) {
        doc["binary"][name] = json::array();
        for (auto& [a, b] : pairs) doc["binary"][name].push_back({a, b});
    }
    return load_database(doc);
}

Database counterexample_db() { return small_graph({1, 2, 3, 7}, {{"e1", {{1, 2}, {3, 2}}}, {"e2", {{1, 2}, {3, 7}}}}); }

std::vector<int> items(const std::vector<starlang::Violation>& v) {
    std::vector<int> out;
    for (auto& x : v) out.push_back(x.item);
    return out;
}

struct Cli {
    int status = -1;
    std::string out;
};

Cli run_cli(const std::vector<std::string>& args) {
    std::string cmd = "'" + std::string(STARQUERY_CLI_PATH) + "'";
    for (auto& a : args) {
        std::string q;
        for (char c : a) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
        cmd += " '" + q + "'";
    }
    cmd += " 2>/dev/null";
    Cli r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

// --- criteria --------------------------------------------------------------

Outcome normalization_golden() {
    auto t0 = Clock::now();
    starlang::Program p;
    auto rule = starlang::parse_rule("r(X) :- e1(X, Y), e1(X, Z), e2(Y, W), r(W), e2(V, Z), !p(V), d(U), e1(U, R).");
    auto out = starlang::normalize(rule, p);
    auto expected = starlang::parse_starlang(R"(
        t1(X) :- s1(X), s2(X), t5(U).
        s1(X) :- e1(X, Y), s3(Y).
        s2(X) :- e1(X, Z), s4(Z).
        s3(Y) :- e2(Y, W), t2(W).
        s4(Z) :- e2(V, Z), t3(V).
        t2(W) :- r(W).
        t3(V) :- !p(V).
        t5(U) :- d(U), s5(U).
        s5(U) :- e1(U, R).
        r(X) :- t1(X).
    )").rules;
    auto listing_fresh = [](const std::string& s) { return std::regex_match(s, std::regex("[ts][0-9]+")); };
    require(out.size() == 10, "expected 10 rules, got " + std::to_string(out.size()));
    require(starlang::canonical_form(out, "r", starlang::is_generated_name) ==
                starlang::canonical_form(expected, "r", listing_fresh),
            "structure differs from the listing");
    require(starlang::validate_definition_I(out).empty(), "output is not in single-join shape");
    double ms = ms_since(t0);
    require(ms < kNormalizeBudgetMs, "took " + std::to_string(ms) + " ms");
    return {true, "10 rules, structural match"};
}

Outcome counterexample() {
    Database db = counterexample_db();
    auto original = oracle::evaluate_naive(oracle::parse_datalog("r(X) :- e1(X,Y), e2(X,Y)."), db);
    require(external(db, oracle::unary_extension(original, "r")) == std::vector<std::int64_t>{1}, "original != {1}");

    starlang::Program p;
    auto forced = starlang::normalize(starlang::parse_rule("r(X) :- e1(X,Y), e2(X,Y)."), p, {.force = true});
    auto transformed = oracle::evaluate_naive(oracle::from_starlang(forced), db);
    require(external(db, oracle::unary_extension(transformed, "r")) == std::vector<std::int64_t>{1, 3},
            "forced normalization != {1,3}");

    auto v = starlang::validate_definition_II(starlang::parse_starlang("r(X) :- e1(X,Y), e2(X,Y)."));
    require(items(v) == std::vector<int>{4}, "validator did not cite item 4");
    return {true, "original {1}, forced {1,3}, rejected by item 4"};
}

Outcome validity_suite() {
    const std::string defs = "p1(X) :- f1(X).\np2(X) :- f2(X).\np3(X) :- f3(X).\n";
    int accepted = 0, rejected = 0;
    for (const char* rule : {"r(X) :- .", "r(X) :- f1(X), p1(X), f2(X), p2(X), p3(X), f3(Z).",
                             "r(X) :- !p1(X), f1(X), p2(X).", "r(X) :- !p1(X), p1(X).",
                             "r(X) :- e1(X, Y), e1(X, Z), e2(Y, W), r(W), e2(V, Z), p2(V)."}) {
        auto v = starlang::validate_definition_II(starlang::parse_starlang(defs + rule));
        require(v.empty(), std::string("rejected valid rule ") + rule);
        ++accepted;
    }
    std::pair<const char*, int> invalid[] = {
        {"r(X) :- e(Y, X), !r(Y).", 3}, {"r(X) :- e(Y, Z).", 4}, {"r(X) :- e1(X, Y), e2(X, Y).", 4}};
    for (auto& [rule, item] : invalid) {
        auto v = starlang::validate_definition_II(starlang::parse_starlang(rule));
        require(items(v) == std::vector<int>{item}, std::string("wrong citation for ") + rule);
        ++rejected;
    }
    return {true, std::to_string(accepted) + " accepted, " + std::to_string(rejected) + " rejected with correct item"};
}

Outcome equivalence() {
    auto t0 = Clock::now();
    std::size_t cases = 0;
    for (std::uint64_t seed = 0; seed < kEquivalenceCases; ++seed) {
        auto inst = oracle::random_rule_instance(seed);
        require(inst.db.size() <= 30, "instance larger than 30 nodes");
        starlang::Program p = inst.program;
        auto normalized = starlang::normalize(p.rules[0], p, {.keep_if_shaped = false});
        normalized.push_back(p.rules[1]);
        auto orig = oracle::unary_extension(oracle::evaluate_naive(oracle::from_starlang(inst.program.rules), inst.db), "r");
        auto norm = oracle::unary_extension(oracle::evaluate_naive(oracle::from_starlang(normalized), inst.db), "r");
        starlang::Program np;
        np.rules = normalized;
        np.query = "r";
        auto engine = evaluate(np, inst.db).matches;
        require(orig == norm && norm == engine, "seed " + std::to_string(seed) + " disagrees");
        ++cases;
    }
    double ms = ms_since(t0);
    require(ms < kEquivalenceBudgetMs, "took " + std::to_string(ms) + " ms");
    return {true, std::to_string(cases) + " cases, 0 failures"};
}

Outcome differential() {
    auto t0 = Clock::now();
    std::size_t cases = 0;
    for (std::uint64_t seed = 0; seed < kDifferentialCases; ++seed) {
        auto inst = oracle::random_instance(seed);
        auto res = evaluate(inst.program, inst.db);
        auto rel = oracle::evaluate_naive(oracle::from_starlang(inst.program.rules), inst.db);
        for (auto& h : starlang::rule_heads(inst.program.rules))
            require(res.relations.at(h) == oracle::unary_extension(rel, h),
                    "seed " + std::to_string(seed) + " predicate " + h);
        ++cases;
    }
    double ms = ms_since(t0);
    require(ms < kDifferentialBudgetMs, "took " + std::to_string(ms) + " ms");
    return {true, std::to_string(cases) + " programs, 0 failures"};
}

Outcome end_to_end() {
    const std::string query = R"(CallExpression<"read"> and HasArg0<DataFlowAfter<Arg0In<CallExpression<"close">>>>)";
    auto dir = std::filesystem::temp_directory_path() / ("starquery-acceptance-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    auto t0 = Clock::now();
    std::string detail;
    for (const char* snippet : {"snippet1.toy", "snippet2.toy"}) {
        std::string toy = source(std::string("fixtures/toy/") + snippet);
        auto facts = (dir / (std::string(snippet) + ".json")).string();
        require(run_cli({"analyze", toy, "--out", facts}).status == 0, std::string("analyze failed on ") + snippet);
        auto r = run_cli({"query", "--db", facts, "--query", query});
        require(r.status == 0, std::string("query failed on ") + snippet);
        auto doc = json::parse(r.out);
        require(doc["count"] == 1, std::string("expected one match in ") + snippet);
        auto& m = doc["matches"][0];

        // Locate the f.read() call in the source by text.
        std::ifstream in(toy);
        long line_no = 0, expected_line = 0;
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            if (line.find("f.read()") != std::string::npos) expected_line = line_no;
        }
        require(m["name"] == "read" && m["file"] == toy && m["line"] == expected_line,
                std::string("match is not the f.read() call in ") + snippet);
        detail += std::string(detail.empty() ? "" : ", ") + snippet + ":" + std::to_string(expected_line);
    }
    double ms = ms_since(t0);
    std::filesystem::remove_all(dir);
    require(ms < kEndToEndBudgetMs, "took " + std::to_string(ms) + " ms");
    return {true, "one f.read() match each (" + detail + ")"};
}

Outcome case_studies() {
    std::ifstream in(source("fixtures/cases/manifest.json"));
    auto manifest = json::parse(in);
    auto config = codesearch::load_config_file(source("fixtures/demo_config.json"));
    std::string detail;
    for (auto& c : manifest["cases"]) {
        std::string name = c["name"];
        auto db = load_database_file(source("fixtures/cases/" + c["graph"].get<std::string>()));
        auto doc = commands::run_query(db, config, c["query"]);
        std::vector<std::int64_t> ids;
        for (auto& m : doc["matches"]) ids.push_back(m["id"]);
        std::sort(ids.begin(), ids.end());
        require(ids == c["expected"].get<std::vector<std::int64_t>>(), name + ": unexpected matches " + json(ids).dump());
        for (auto r : c.value("rejected", std::vector<std::int64_t>{}))
            require(!std::binary_search(ids.begin(), ids.end(), r), name + ": matched rejected node");
        detail += (detail.empty() ? "" : " ") + name;
    }
    return {true, detail};
}

Outcome scaling() {
    auto t0 = Clock::now();
    auto prep = prepare(starlang::parse_starlang("r(X) :- p(X).\nr(X) :- e(X, Y), r(Y).\n.query r."));
    std::vector<double> times;
    std::ostringstream detail;
    detail << std::fixed << std::setprecision(2);
    for (std::size_t n : kChainSizes) {
        DatabaseBuilder b;
        for (std::size_t i = 0; i < n; ++i) b.add_node(NodeKind::Other, {});
        b.declare_binary("e");
        for (std::size_t i = 0; i + 1 < n; ++i) b.add_edge("e", static_cast<NodeId>(i), static_cast<NodeId>(i + 1));
        b.declare_unary("p");
        b.add_unary("p", static_cast<NodeId>(n - 1));
        Database db = std::move(b).build();

        std::vector<double> runs;
        EvalResult res;
        for (int k = 0; k < kChainRepeats; ++k) {
            auto s = Clock::now();
            res = evaluate(prep, db);
            runs.push_back(ms_since(s));
        }
        std::sort(runs.begin(), runs.end());
        times.push_back(runs[runs.size() / 2]);
        require(res.matches.size() == n, "wrong closure size at n=" + std::to_string(n));
        for (auto it : res.metrics.stratum_iterations)
            require(it <= db.size(), "stratum iterations exceed T at n=" + std::to_string(n));
        detail << "n=" << n << " " << times.back() << "ms ";
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        double ratio = times[i] / std::max(times[i - 1], 1e-3);
        detail << "ratio" << i << "=" << ratio << " ";
        require(ratio <= kMaxGrowthRatio, "growth ratio " + std::to_string(ratio) + " exceeds bound");
    }
    double ms = ms_since(t0);
    require(ms < kScalingBudgetMs, "took " + std::to_string(ms) + " ms");
    return {true, detail.str() + "iterations <= T"};
}

Outcome grammar() {
    using codesearch::Query;
    using codesearch::QueryKind;
    using codesearch::LiteralKind;
    auto parse = [](const std::string& s) { return codesearch::parse_codesearch(s); };

    auto lit = [](const char* s) { return Query::lit(LiteralKind::Exact, s); };
    Query expected = Query::join(QueryKind::Or, {lit("a"), Query::join(QueryKind::And, {Query::negate(lit("b")), lit("c")})});
    require(parse("a or not b and c") == expected, "precedence");
    require(parse("~\"^re.d$\"").literal == LiteralKind::Regex, "regex literal");
    bool bad_regex = false;
    try {
        parse("CallExpression<~\"(ab\">");
    } catch (const ParseError&) {
        bad_regex = true;
    }
    require(bad_regex, "invalid regex accepted");
    auto pred = parse("Taint<PRED:AnySource, PRED:SqliSanitizer, PRED:SqliSink>");
    require(pred.children.size() == 3 && pred.children[0].kind == QueryKind::Predicate && pred.children[0].prefixed,
            "PRED citation");
    auto deep = parse("DataFlowAfter<HasArg0<Arg0In<ForSameObject<CallExpression<\"close\">>>>>");
    int depth = 0;
    for (const Query* q = &deep; q->kind == QueryKind::Template; q = &q->children[0]) ++depth;
    require(depth == 5, "depth-5 nesting");

    for (std::uint64_t seed = 0; seed < kRoundTripCases; ++seed) {
        Query q = codesearch::QueryGenerator(seed).next();
        std::string printed = codesearch::to_string(q);
        Query back = parse(printed);
        require(back == q && codesearch::to_string(back) == printed, "round trip failed for seed " + std::to_string(seed));
    }
    return {true, "precedence, regex, PRED, depth 5, " + std::to_string(kRoundTripCases) + " round trips"};
}

Outcome memoization() {
    auto t0 = Clock::now();
    auto p = starlang::parse_starlang(R"(
        template Tmpl(p) -> t { t(X) :- p(X), e(X, Y), Tmpl(p)(Y). }
        r(X) :- Tmpl(a)(X).
    )");
    auto stats = starlang::expand_templates(p);
    double ms = ms_since(t0);
    require(stats.expansions == 1, "expected one expansion, got " + std::to_string(stats.expansions));
    require(stats.memo_hits == 1, "self-instantiation was not memoized");
    require(p.rules.size() == 2, "unexpected program shape");
    require(ms < kExpansionBudgetMs, "took " + std::to_string(ms) + " ms");
    std::ostringstream d;
    d << std::fixed << std::setprecision(3) << p.rules.size() << " rules, 1 expansion, " << ms << " ms";
    return {true, d.str()};
}

Outcome preliminaries() {
    DatabaseBuilder b;
    std::map<std::string, NodeId> id;
    for (const char* n : {"john", "mary", "joe", "kurt", "tine"}) id[n] = b.add_node(NodeKind::Other, {{"name", n}});
    b.add_edge("father", id["john"], id["mary"]);
    b.add_edge("father", id["joe"], id["kurt"]);
    b.add_edge("mother", id["mary"], id["joe"]);
    b.add_edge("father", id["tine"], id["kurt"]);
    Database db = std::move(b).build();
    auto rel = oracle::evaluate_naive(oracle::parse_datalog(R"(
        parent(X,Y) :- father(X,Y).
        parent(X,Y) :- mother(X,Y).
        ancestor(X,Y) :- parent(X,Y).
        ancestor(X,Y) :- parent(X,Z), ancestor(Z,Y).
    )"),
                                      db);
    auto& anc = rel["ancestor"];
    require(anc.count({id["mary"], id["joe"]}) && anc.count({id["john"], id["joe"]}), "missing expected ancestor facts");
    std::set<oracle::Tuple> closure = rel["parent"];
    for (bool grew = true; grew;) {
        grew = false;
        for (auto& a : std::set<oracle::Tuple>(closure))
            for (auto& c : rel["parent"])
                if (a[1] == c[0]) grew |= closure.insert({a[0], c[1]}).second;
    }
    require(anc == closure, "ancestor differs from the transitive closure of parent");
    return {true, std::to_string(anc.size()) + " ancestor facts, closure exact"};
}

}  // namespace

int main() {
    logger().set_level(spdlog::level::err);
    struct Criterion {
        const char* id;
        const char* title;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"AC1", "normalization golden listing", normalization_golden},
        {"AC2", "non-equivalence counterexample", counterexample},
        {"AC3", "rule validity suite", validity_suite},
        {"AC4", "normalization equivalence property", equivalence},
        {"AC5", "engine vs naive oracle", differential},
        {"AC6", "read-after-close end to end", end_to_end},
        {"AC7", "case-study fixtures", case_studies},
        {"AC8", "chain scaling bound", scaling},
        {"AC9", "grammar conformance", grammar},
        {"AC10", "template memoization", memoization},
        {"AC11", "ancestor preliminaries", preliminaries},
    };
    int failures = 0;
    for (auto& c : criteria) {
        auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, e.what()};
        }
        failures += !o.pass;
        std::printf("%-4s %s  %-36s %8.1f ms  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, ms_since(t0),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
