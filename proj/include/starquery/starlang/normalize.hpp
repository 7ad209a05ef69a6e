#pragma once

// Rewrites an inductively valid rule into rules of the 𝒜,ℬ,𝒞 shape by a DFS
// over its variable graph: one t-rule per variable node, one s-rule per edge.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ast.hpp"
#include "parser.hpp"
#include "validate.hpp"

namespace starquery::starlang {

struct NormalizeOptions {
    bool force = false;           // skip validation and transform anyway
    bool keep_if_shaped = true;   // return rules already in 𝒜,ℬ,𝒞 shape unchanged
};

/// Returns rules defining `r.head` equivalently. Fresh names come from `prog`.
/// Throws CompileError if `r` is not inductively valid (unless forced).
inline std::vector<Rule> normalize(const Rule& r, Program& prog, NormalizeOptions opt = {}) {
    if (!opt.force) {
        auto v = validate_rule_II(r, {r});
        if (!v.empty()) throw CompileError("cannot normalize: " + to_string(v.front()));
    }
    if (opt.keep_if_shaped && std::holds_alternative<RuleShape>(decompose_definition_I(r))) return {r};

    const std::string& x = r.head_var;
    std::vector<std::string> order;  // variables by first appearance
    std::map<std::string, std::vector<const Citation*>> unary;
    std::map<std::string, std::vector<std::size_t>> incident;  // var -> edge indices
    std::vector<const Citation*> edges;
    auto see = [&](const std::string& v) {
        if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
    };
    see(x);
    for (auto& c : r.body) {
        for (auto& v : c.vars) see(v);
        if (c.is_unary()) {
            unary[c.vars[0]].push_back(&c);
        } else {
            incident[c.vars[0]].push_back(edges.size());
            if (c.vars[1] != c.vars[0]) incident[c.vars[1]].push_back(edges.size());
            edges.push_back(&c);
        }
    }

    struct Child {
        std::size_t edge;
        std::string var;
        bool leaf_copy;  // forced mode: endpoint already claimed elsewhere
    };
    std::map<std::string, std::vector<Child>> children;
    std::set<std::string> visited;
    std::vector<bool> edge_used(edges.size(), false);
    std::vector<std::string> roots{x};

    auto traverse = [&](const std::string& root) {
        std::vector<std::string> stack{root};
        visited.insert(root);
        while (!stack.empty()) {
            std::string y = stack.back();
            stack.pop_back();
            std::vector<std::string> next;
            for (std::size_t ei : incident[y]) {
                if (edge_used[ei]) continue;
                edge_used[ei] = true;
                const Citation& b = *edges[ei];
                std::string z = b.vars[0] == y ? b.vars[1] : b.vars[0];
                if (visited.count(z)) {
                    if (!opt.force) throw CompileError("variable graph of `" + to_string(r) + "` is not a forest");
                    children[y].push_back({ei, z, true});
                    continue;
                }
                visited.insert(z);
                children[y].push_back({ei, z, false});
                next.push_back(z);
            }
            stack.insert(stack.end(), next.rbegin(), next.rend());
        }
    };
    traverse(x);
    for (auto& v : order) {
        if (visited.count(v) || !unary.count(v)) continue;
        roots.push_back(v);
        traverse(v);
    }
    for (auto& v : order)
        if (!visited.count(v)) {
            // Only reachable when forced on a component with no anchor.
            roots.push_back(v);
            traverse(v);
        }

    auto needs_t = [&](const std::string& v) {
        return v == x || std::find(roots.begin(), roots.end(), v) != roots.end() || unary.count(v) ||
               children[v].size() >= 2;
    };

    std::map<std::string, std::string> t_name, s_name;  // s_name keyed by child var
    std::vector<Rule> out;
    std::function<void(const std::string&)> emit_t;
    // Citation that stands for "subtree at z holds", or nothing when trivially true.
    std::function<std::optional<Citation>(const std::string&)> subtree;

    auto emit_s = [&](const std::string& y, const Child& ch) {
        std::string s = prog.fresh("s");
        Rule rule{s, y, {*edges[ch.edge]}, r.pos};
        rule.body.back().pos = {};
        if (!ch.leaf_copy)
            if (auto tail = subtree(ch.var)) rule.body.push_back(*tail);
        out.push_back(std::move(rule));
        return s;
    };
    subtree = [&](const std::string& z) -> std::optional<Citation> {
        if (needs_t(z)) {
            emit_t(z);
            return Citation::unary(t_name[z], z);
        }
        auto& ch = children[z];
        if (ch.empty()) return std::nullopt;
        return Citation::unary(emit_s(z, ch.front()), z);
    };
    emit_t = [&](const std::string& y) {
        std::string t = prog.fresh("t");
        t_name[y] = t;
        std::size_t at = out.size();
        out.push_back(Rule{t, y, {}, r.pos});
        std::vector<Citation> body;
        for (auto* c : unary[y]) {
            body.push_back(*c);
            body.back().pos = {};
        }
        for (auto& ch : children[y]) body.push_back(Citation::unary(emit_s(y, ch), y));
        if (y == x)
            for (std::size_t i = 1; i < roots.size(); ++i) {
                emit_t(roots[i]);
                body.push_back(Citation::unary(t_name[roots[i]], roots[i]));
            }
        out[at].body = std::move(body);
    };
    emit_t(x);
    out.push_back(Rule{r.head, x, {Citation::unary(t_name[x], x)}, r.pos});
    return out;
}

/// Normalizes every rule of the program in place.
inline void normalize_program(Program& prog, NormalizeOptions opt = {}) {
    std::vector<Rule> out;
    for (const Rule& r : prog.rules) {
        auto n = normalize(r, prog, opt);
        out.insert(out.end(), n.begin(), n.end());
    }
    prog.rules = std::move(out);
}

/// A structural fingerprint of `root`'s definition in which every predicate
/// accepted by `is_fresh` is replaced by the canonical form of its own rules.
/// Two rule sets related by a renaming of fresh names have equal forms.
inline std::string canonical_form(const std::vector<Rule>& rules, const std::string& root,
                                  const std::function<bool(const std::string&)>& is_fresh) {
    std::map<std::string, std::vector<const Rule*>> defs;
    for (auto& r : rules) defs[r.head].push_back(&r);
    std::map<std::string, std::string> memo;
    std::set<std::string> active;
    std::function<std::string(const std::string&)> form = [&](const std::string& p) -> std::string {
        if (auto m = memo.find(p); m != memo.end()) return m->second;
        if (active.count(p)) return "<cycle>";
        active.insert(p);
        std::vector<std::string> rs;
        for (const Rule* r : defs[p]) {
            std::vector<std::string> cits;
            for (auto& c : r->body) {
                std::string name = is_fresh(c.predicate) ? "[" + form(c.predicate) + "]" : c.predicate;
                std::string s = (c.negated ? "!" : "") + name + "(";
                for (std::size_t i = 0; i < c.vars.size(); ++i) s += (i ? "," : "") + c.vars[i];
                cits.push_back(s + ")");
            }
            std::sort(cits.begin(), cits.end());
            std::string s = r->head_var + ":-";
            for (auto& c : cits) s += c + ";";
            rs.push_back(s);
        }
        std::sort(rs.begin(), rs.end());
        std::string s;
        for (auto& x : rs) s += "{" + x + "}";
        active.erase(p);
        return memo[p] = s;
    };
    return form(root);
}

inline bool is_generated_name(const std::string& s) { return s.rfind("__", 0) == 0; }

}  // namespace starquery::starlang
