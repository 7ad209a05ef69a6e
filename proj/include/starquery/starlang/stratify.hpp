#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "../common.hpp"
#include "ast.hpp"

namespace starquery::starlang {

/// One body dependency of an intensional predicate.
struct Dependency {
    std::string head;
    std::string dep;
    bool negated = false;
};

struct Stratification {
    std::vector<std::vector<std::string>> strata;  // sorted names per stratum
    std::map<std::string, std::size_t> level;

    std::size_t stratum_of(const std::string& p) const { return level.at(p); }
};

class StratificationError : public Error {
public:
    StratificationError(std::vector<std::string> cycle)
        : Error("negative cycle through: " + join(cycle)), cycle_(std::move(cycle)) {}
    const std::vector<std::string>& cycle() const { return cycle_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (auto& x : v) s += (s.empty() ? "" : ", ") + x;
        return s;
    }
    std::vector<std::string> cycle_;
};

/// Stratifies the predicates in `heads` given their dependencies. Dependencies on
/// names outside `heads` are extensional and ignored. Throws StratificationError
/// when a negative edge stays inside one strongly connected component.
inline Stratification stratify(const std::set<std::string>& heads, const std::vector<Dependency>& deps) {
    std::vector<std::string> names(heads.begin(), heads.end());
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < names.size(); ++i) idx[names[i]] = i;
    struct Edge {
        std::size_t to;
        bool neg;
    };
    std::vector<std::vector<Edge>> adj(names.size());
    for (auto& d : deps) {
        auto h = idx.find(d.head), t = idx.find(d.dep);
        if (h == idx.end() || t == idx.end()) continue;
        adj[h->second].push_back({t->second, d.negated});
    }

    // Tarjan, iterative. Components come out dependencies-first.
    const std::size_t n = names.size(), unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;
    std::size_t counter = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unset) continue;
        std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, ei] = call.back();
            if (ei < adj[v].size()) {
                std::size_t w = adj[v][ei++].to;
                if (index[w] == unset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<std::size_t> c;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = comps.size();
                    c.push_back(w);
                } while (w != v);
                comps.push_back(std::move(c));
            }
            std::size_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }

    std::vector<std::size_t> comp_level(comps.size(), 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        std::size_t lvl = 0;
        for (std::size_t v : comps[c]) {
            for (auto& e : adj[v]) {
                if (comp[e.to] == c) {
                    if (e.neg) {
                        std::vector<std::string> cyc;
                        for (std::size_t u : comps[c]) cyc.push_back(names[u]);
                        std::sort(cyc.begin(), cyc.end());
                        throw StratificationError(cyc);
                    }
                    continue;
                }
                lvl = std::max(lvl, comp_level[comp[e.to]] + (e.neg ? 1 : 0));
            }
        }
        comp_level[c] = lvl;
    }

    Stratification s;
    std::size_t max_level = 0;
    for (std::size_t v = 0; v < n; ++v) max_level = std::max(max_level, comp_level[comp[v]]);
    if (n) s.strata.resize(max_level + 1);
    for (std::size_t v = 0; v < n; ++v) {
        s.level[names[v]] = comp_level[comp[v]];
        s.strata[comp_level[comp[v]]].push_back(names[v]);
    }
    // Drop empty levels so stratum indices stay dense.
    std::vector<std::vector<std::string>> dense;
    for (auto& st : s.strata)
        if (!st.empty()) dense.push_back(std::move(st));
    s.strata = std::move(dense);
    for (std::size_t i = 0; i < s.strata.size(); ++i)
        for (auto& p : s.strata[i]) s.level[p] = i;
    return s;
}

inline std::set<std::string> rule_heads(const std::vector<Rule>& rules) {
    std::set<std::string> h;
    for (auto& r : rules) h.insert(r.head);
    return h;
}

inline std::vector<Dependency> dependencies(const std::vector<Rule>& rules) {
    std::vector<Dependency> deps;
    for (auto& r : rules)
        for (auto& c : r.body)
            if (!c.call) deps.push_back({r.head, c.predicate, c.negated});
    return deps;
}

inline Stratification stratify(const std::vector<Rule>& rules) {
    return stratify(rule_heads(rules), dependencies(rules));
}

inline Stratification stratify(const Program& p) { return stratify(p.rules); }

/// Set of intensional predicates that `from` depends on, transitively, including itself.
inline std::set<std::string> depends_closure(const std::vector<Rule>& rules, const std::string& from) {
    std::map<std::string, std::vector<std::string>> adj;
    for (auto& d : dependencies(rules)) adj[d.head].push_back(d.dep);
    std::set<std::string> seen{from};
    std::vector<std::string> work{from};
    while (!work.empty()) {
        std::string p = std::move(work.back());
        work.pop_back();
        for (auto& q : adj[p])
            if (seen.insert(q).second) work.push_back(q);
    }
    return seen;
}

}  // namespace starquery::starlang
