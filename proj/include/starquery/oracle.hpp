#pragma once

// Reference evaluator for general stratified Datalog: any arity, arbitrary
// variable sharing, full re-derivation every round, no indexes.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "factstore.hpp"
#include "starlang/ast.hpp"
#include "starlang/lexer.hpp"
#include "starlang/parser.hpp"
#include "starlang/stratify.hpp"

namespace starquery::oracle {

struct Atom {
    std::string predicate;
    std::vector<std::string> args;  // variables only
    bool negated = false;
};

struct GeneralRule {
    Atom head;
    std::vector<Atom> body;
};

struct GeneralProgram {
    std::vector<GeneralRule> rules;
};

using Tuple = std::vector<NodeId>;
using Relations = std::map<std::string, std::set<Tuple>>;

/// Parses `head(X, Y) :- a(X, Z), !b(Z).` rules with any arity.
inline GeneralProgram parse_datalog(std::string_view text) {
    using starlang::Tok;
    starlang::TokenStream ts(starlang::tokenize(text));
    auto atom = [&](bool allow_neg) {
        Atom a;
        if (allow_neg) a.negated = ts.accept(Tok::Bang);
        a.predicate = ts.expect(Tok::Ident, "(predicate)").text;
        ts.expect(Tok::LParen, "after predicate");
        if (!ts.at(Tok::RParen)) {
            do a.args.push_back(ts.expect(Tok::Ident, "(variable)").text);
            while (ts.accept(Tok::Comma));
        }
        ts.expect(Tok::RParen, "after arguments");
        return a;
    };
    GeneralProgram p;
    while (!ts.at(Tok::End)) {
        GeneralRule r;
        r.head = atom(false);
        ts.expect(Tok::Implies, "after rule head");
        if (!ts.at(Tok::Dot)) {
            do r.body.push_back(atom(true));
            while (ts.accept(Tok::Comma));
        }
        ts.expect(Tok::Dot, "to end rule");
        p.rules.push_back(std::move(r));
    }
    return p;
}

inline GeneralProgram from_starlang(const std::vector<starlang::Rule>& rules) {
    GeneralProgram p;
    for (auto& r : rules) {
        GeneralRule g{{r.head, {r.head_var}, false}, {}};
        for (auto& c : r.body) {
            if (c.call) throw CompileError("oracle: unexpanded template invocation in " + starlang::to_string(r));
            g.body.push_back({c.predicate, c.vars, c.negated});
        }
        p.rules.push_back(std::move(g));
    }
    return p;
}

/// Extensional facts drawn from the database plus optional extra unary sets.
inline Relations edb_relations(const Database& db, const std::map<std::string, std::vector<NodeId>>& extra = {}) {
    Relations rel;
    for (auto& [name, u] : db.unary_relations())
        for (NodeId id : u.members.members()) rel[name].insert({id});
    for (auto& [name, b] : db.binary_relations())
        for (auto& [s, d] : b.pairs()) rel[name].insert({s, d});
    for (auto& [name, ids] : extra)
        for (NodeId id : ids) rel[name].insert({id});
    return rel;
}

namespace detail {

inline void ground_rule(const GeneralRule& r, const Relations& rel, std::size_t domain, std::set<Tuple>& out) {
    static const std::set<Tuple> none;
    auto lookup = [&](const std::string& p) -> const std::set<Tuple>& {
        auto it = rel.find(p);
        return it == rel.end() ? none : it->second;
    };
    std::vector<const Atom*> pos, neg;
    for (auto& a : r.body) (a.negated ? neg : pos).push_back(&a);

    std::map<std::string, NodeId> env;
    std::vector<bool> used(pos.size(), false);

    // Variables not bound by a positive atom range over the active domain.
    auto finish = [&]() {
        std::vector<std::string> free;
        auto note = [&](const std::string& v) {
            if (!env.count(v) && std::find(free.begin(), free.end(), v) == free.end()) free.push_back(v);
        };
        for (auto& v : r.head.args) note(v);
        for (auto* a : neg)
            for (auto& v : a->args) note(v);
        std::vector<NodeId> vals(free.size(), 0);
        if (!free.empty() && domain == 0) return;
        while (true) {
            for (std::size_t i = 0; i < free.size(); ++i) env[free[i]] = vals[i];
            bool ok = true;
            for (auto* a : neg) {
                Tuple t;
                for (auto& v : a->args) t.push_back(env.at(v));
                if (lookup(a->predicate).count(t)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                Tuple h;
                for (auto& v : r.head.args) h.push_back(env.at(v));
                out.insert(h);
            }
            std::size_t i = 0;
            while (i < free.size() && ++vals[i] == domain) vals[i++] = 0;
            if (i == free.size()) break;
        }
        for (auto& v : free) env.erase(v);
    };

    auto step = [&](auto&& self, std::size_t depth) -> void {
        if (depth == pos.size()) {
            finish();
            return;
        }
        // Prefer the unused atom with the most bound arguments.
        std::size_t pick = pos.size();
        int best = -1;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (used[i]) continue;
            int bound = 0;
            for (auto& v : pos[i]->args) bound += env.count(v) ? 1 : 0;
            if (bound > best) best = bound, pick = i;
        }
        used[pick] = true;
        const Atom& a = *pos[pick];
        for (const Tuple& t : lookup(a.predicate)) {
            if (t.size() != a.args.size()) continue;
            std::vector<std::string> bound_here;
            bool ok = true;
            for (std::size_t k = 0; k < t.size() && ok; ++k) {
                auto it = env.find(a.args[k]);
                if (it == env.end()) {
                    env[a.args[k]] = t[k];
                    bound_here.push_back(a.args[k]);
                } else {
                    ok = it->second == t[k];
                }
            }
            if (ok) self(self, depth + 1);
            for (auto& v : bound_here) env.erase(v);
        }
        used[pick] = false;
    };
    step(step, 0);
}

}  // namespace detail

/// Stratified least fixpoint by naive iteration. Returns every relation
/// (extensional ones included). Throws StratificationError.
inline Relations evaluate_naive(const GeneralProgram& prog, Relations rel, std::size_t domain) {
    std::set<std::string> heads;
    std::vector<starlang::Dependency> deps;
    for (auto& r : prog.rules) {
        heads.insert(r.head.predicate);
        for (auto& a : r.body) deps.push_back({r.head.predicate, a.predicate, a.negated});
    }
    auto strata = starlang::stratify(heads, deps);
    for (auto& h : heads) rel[h];
    for (auto& stratum : strata.strata) {
        std::set<std::string> in(stratum.begin(), stratum.end());
        while (true) {
            Relations derived;
            for (auto& r : prog.rules)
                if (in.count(r.head.predicate)) detail::ground_rule(r, rel, domain, derived[r.head.predicate]);
            bool changed = false;
            for (auto& [p, ts] : derived)
                for (auto& t : ts) changed |= rel[p].insert(t).second;
            if (!changed) break;
        }
    }
    return rel;
}

inline Relations evaluate_naive(const GeneralProgram& prog, const Database& db,
                                const std::map<std::string, std::vector<NodeId>>& extra = {}) {
    return evaluate_naive(prog, edb_relations(db, extra), db.size());
}

/// Sorted extension of a unary relation.
inline std::vector<NodeId> unary_extension(const Relations& rel, const std::string& p) {
    std::vector<NodeId> out;
    if (auto it = rel.find(p); it != rel.end())
        for (auto& t : it->second)
            if (t.size() == 1) out.push_back(t[0]);
    return out;
}

// --- random instances -------------------------------------------------------

struct Bounds {
    std::size_t max_predicates = 8;
    std::size_t max_rules = 6;
    std::size_t max_nodes = 30;
    std::size_t max_binary = 3;
    std::size_t max_edges_per_rule = 4;
};

struct Instance {
    starlang::Program program;
    Database db;
};

namespace detail {

inline Database random_db(std::mt19937_64& rng, const Bounds& b, std::size_t n_binary,
                          const std::vector<std::string>& unary_names) {
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    std::size_t n = pick(1, b.max_nodes);
    DatabaseBuilder builder;
    for (std::size_t i = 0; i < n; ++i) builder.add_node(NodeKind::Other, {{"name", "n" + std::to_string(i)}});
    for (std::size_t k = 0; k < n_binary; ++k) {
        std::string name = "e" + std::to_string(k);
        builder.declare_binary(name);
        std::size_t m = pick(0, 2 * n);
        for (std::size_t i = 0; i < m; ++i)
            builder.add_edge(name, static_cast<NodeId>(pick(0, n - 1)), static_cast<NodeId>(pick(0, n - 1)));
    }
    for (auto& u : unary_names) {
        builder.declare_unary(u);
        std::size_t density = pick(0, 4);
        for (std::size_t i = 0; i < n; ++i)
            if (pick(0, 4) < density) builder.add_unary(u, static_cast<NodeId>(i));
    }
    return std::move(builder).build();
}

/// Grows a Definition-II body: a random tree of edges rooted at the head
/// variable, optional disconnected components, unary citations from `choose`.
template <class Choose>
std::vector<starlang::Citation> random_body(std::mt19937_64& rng, const Bounds& b, std::size_t n_binary,
                                            const std::string& head_var, Choose&& choose) {
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    std::vector<starlang::Citation> body;
    std::vector<std::string> vars{head_var};
    std::size_t next_var = 0;
    auto fresh = [&] { return "V" + std::to_string(next_var++); };

    std::size_t components = pick(0, 3) == 0 ? 2 : 1;
    for (std::size_t comp = 0; comp < components; ++comp) {
        std::vector<std::string> local;
        if (comp == 0) {
            local.push_back(head_var);
        } else {
            std::string u = fresh();
            local.push_back(u);
            body.push_back(choose(u));  // anchor
        }
        std::size_t edges = pick(0, b.max_edges_per_rule);
        for (std::size_t i = 0; i < edges; ++i) {
            const std::string& from = local[pick(0, local.size() - 1)];
            std::string to = fresh();
            std::string e = "e" + std::to_string(pick(0, n_binary - 1));
            body.push_back(pick(0, 1) ? starlang::Citation::binary(e, from, to) : starlang::Citation::binary(e, to, from));
            local.push_back(to);
        }
        std::size_t unaries = pick(0, local.size() + 1);
        for (std::size_t i = 0; i < unaries; ++i) body.push_back(choose(local[pick(0, local.size() - 1)]));
    }
    std::shuffle(body.begin(), body.end(), rng);
    return body;
}

}  // namespace detail

/// A random Definition-II-valid, stratifiable program and a random database.
/// Same seed, same instance.
inline Instance random_instance(std::uint64_t seed, const Bounds& b = {}) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    std::size_t n_binary = pick(1, b.max_binary);
    std::size_t n_edb_unary = 3;
    std::size_t n_idb = pick(1, std::min(b.max_predicates - n_edb_unary, b.max_rules));
    std::vector<std::string> edb_unary, idb;
    for (std::size_t i = 0; i < n_edb_unary; ++i) edb_unary.push_back("f" + std::to_string(i));
    for (std::size_t i = 0; i < n_idb; ++i) idb.push_back("p" + std::to_string(i));
    std::vector<std::size_t> level(n_idb);
    for (auto& l : level) l = pick(0, 2);

    Instance inst;
    std::size_t n_rules = pick(n_idb, b.max_rules);
    for (std::size_t ri = 0; ri < n_rules; ++ri) {
        std::size_t h = ri < n_idb ? ri : pick(0, n_idb - 1);
        auto choose = [&](const std::string& v) {
            // Positive intensional citations stay at or below the head's level,
            // negative ones strictly below.
            for (int attempt = 0; attempt < 8; ++attempt) {
                bool neg = pick(0, 3) == 0;
                if (pick(0, 1)) return starlang::Citation::unary(edb_unary[pick(0, n_edb_unary - 1)], v, neg);
                std::size_t p = pick(0, n_idb - 1);
                if (neg ? level[p] < level[h] : level[p] <= level[h]) return starlang::Citation::unary(idb[p], v, neg);
            }
            return starlang::Citation::unary(edb_unary[0], v);
        };
        starlang::Rule r{idb[h], "X", detail::random_body(rng, b, n_binary, "X", choose), {}};
        inst.program.rules.push_back(std::move(r));
    }
    inst.program.query = idb[pick(0, n_idb - 1)];
    inst.db = detail::random_db(rng, b, n_binary, edb_unary);
    return inst;
}

/// One random Definition-II rule with head `r` (which it may cite recursively),
/// plus a base rule `r(X) :- f0(X).` so recursion has a seed.
inline Instance random_rule_instance(std::uint64_t seed, const Bounds& b = {}) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    std::size_t n_binary = pick(1, b.max_binary);
    std::vector<std::string> edb_unary{"f0", "f1", "f2", "f3"};
    auto choose = [&](const std::string& v) {
        if (pick(0, 4) == 0) return starlang::Citation::unary("r", v);
        return starlang::Citation::unary(edb_unary[pick(0, edb_unary.size() - 1)], v, pick(0, 2) == 0);
    };
    Instance inst;
    Bounds wide = b;
    wide.max_edges_per_rule = std::max<std::size_t>(b.max_edges_per_rule, 6);
    inst.program.rules.push_back({"r", "X", detail::random_body(rng, wide, n_binary, "X", choose), {}});
    inst.program.rules.push_back({"r", "X", {starlang::Citation::unary("f0", "X")}, {}});
    inst.program.query = "r";
    inst.db = detail::random_db(rng, b, n_binary, edb_unary);
    return inst;
}

}  // namespace starquery::oracle
