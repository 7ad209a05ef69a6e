#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ast.hpp"
#include "stdlib.hpp"

namespace starquery::codesearch {

struct GeneratorOptions {
    int max_depth = 5;
    std::vector<std::string> names = {"a", "b", "c"};
    std::vector<std::string> templates = {"CallExpression", "HasArg0",       "Arg0In",   "DataFlowAfter",
                                          "ForSameObject",  "Taint",         "Not",      "And",
                                          "Or",             "HasAnnotation", "Identifier"};
    std::vector<std::string> predicates = {"Any", "None"};
};

/// Grammar-directed random queries: connectives, templates from the given
/// list, predicates and all three literal forms.
class QueryGenerator {
public:
    explicit QueryGenerator(std::uint64_t seed, GeneratorOptions opt = {}) : rng_(seed), opt_(std::move(opt)) {}

    Query next() { return expr(0); }

private:
    std::mt19937_64 rng_;
    GeneratorOptions opt_;

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    Query leaf() {
        switch (pick(5)) {
            case 0: return Query::pred(opt_.predicates[pick(opt_.predicates.size())], pick(2) == 0);
            case 1: return Query::lit(LiteralKind::Regex, "^" + opt_.names[pick(opt_.names.size())]);
            case 2: return Query::lit(LiteralKind::Wildcard, "*");
            default: return Query::lit(LiteralKind::Exact, opt_.names[pick(opt_.names.size())]);
        }
    }

    Query expr(int depth) {
        if (depth >= opt_.max_depth) return leaf();
        switch (pick(6)) {
            case 0: return leaf();
            case 1: return Query::negate(expr(depth + 1));
            case 2:
            case 3: {
                std::vector<Query> parts;
                std::size_t n = 2 + pick(2);
                for (std::size_t i = 0; i < n; ++i) parts.push_back(expr(depth + 1));
                return Query::join(pick(2) ? QueryKind::And : QueryKind::Or, std::move(parts));
            }
            default: {
                const std::string& name = opt_.templates[pick(opt_.templates.size())];
                const StdlibEntry* e = lookup(name);
                std::vector<Query> args;
                for (std::size_t i = 0; i < e->arity(); ++i) args.push_back(expr(depth + 1));
                return Query::call(name, std::move(args));
            }
        }
    }
};

}  // namespace starquery::codesearch
