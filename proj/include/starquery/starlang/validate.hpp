#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "parser.hpp"
#include "stratify.hpp"

namespace starquery::starlang {

/// One failed check. `item` is the Definition-II item (3 or 4) for inductive
/// violations, 0 for shape violations reported by the Definition-I check.
struct Violation {
    std::size_t rule_index = 0;
    std::string rule;
    std::string citation;
    int item = 0;
    std::string message;
    SourcePos pos;
};

inline std::string to_string(const Violation& v) {
    std::string s = "rule " + std::to_string(v.rule_index) + " `" + v.rule + "`";
    if (v.item) s += " violates item " + std::to_string(v.item);
    if (!v.citation.empty()) s += " at `" + v.citation + "`";
    return s + ": " + v.message;
}

namespace detail {

struct UnionFind {
    std::map<std::string, std::string> parent;
    std::string find(const std::string& x) {
        auto it = parent.find(x);
        if (it == parent.end()) {
            parent[x] = x;
            return x;
        }
        if (it->second == x) return x;
        std::string root = find(it->second);
        parent[x] = root;
        return root;
    }
    bool unite(const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[ra] = rb;
        return true;
    }
};

}  // namespace detail

/// Checks one rule against the inductive definition. `program_rules` supplies
/// the dependency context for item 3 (may include the rule itself).
inline std::vector<Violation> validate_rule_II(const Rule& r, const std::vector<Rule>& program_rules,
                                               std::size_t rule_index = 0) {
    std::vector<Violation> out;
    auto report = [&](const Citation& c, int item, std::string msg) {
        out.push_back({rule_index, to_string(r), to_string(c), item, std::move(msg), c.pos});
    };

    // Item 3: no negative citation of a predicate depending on the head.
    for (auto& c : r.body) {
        if (!c.negated || c.call) continue;
        bool self = c.predicate == r.head;
        if (!self) self = depends_closure(program_rules, c.predicate).count(r.head) > 0;
        if (self)
            report(c, 3, "'" + c.predicate + "' is negated but " +
                             (c.predicate == r.head ? "is the head predicate itself" : "depends on '" + r.head + "'"));
    }

    // Item 4: binary citations must form a forest, each anchored by the head
    // variable or a unary citation.
    detail::UnionFind uf;
    uf.find(r.head_var);
    for (auto& c : r.body)
        if (c.is_unary()) uf.find(c.vars[0]);
    for (auto& c : r.body) {
        if (!c.is_binary()) continue;
        const auto& a = c.vars[0];
        const auto& b = c.vars[1];
        if (a == b || !uf.unite(a, b))
            report(c, 4, "neither '" + a + "' nor '" + b + "' is fresh in '" + c.predicate + "'");
    }
    std::set<std::string> anchored{uf.find(r.head_var)};
    for (auto& c : r.body)
        if (c.is_unary()) anchored.insert(uf.find(c.vars[0]));
    for (auto& c : r.body) {
        if (!c.is_binary() || anchored.count(uf.find(c.vars[0]))) continue;
        report(c, 4, "both '" + c.vars[0] + "' and '" + c.vars[1] + "' are fresh in '" + c.predicate + "'");
    }
    return out;
}

/// Empty result means every rule is derivable by the inductive definition.
inline std::vector<Violation> validate_definition_II(const std::vector<Rule>& rules) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        auto v = validate_rule_II(rules[i], rules, i);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

inline std::vector<Violation> validate_definition_II(const Program& p) { return validate_definition_II(p.rules); }

/// The 𝒜 / ℬ / 𝒞 decomposition of a Definition-I rule.
struct RuleShape {
    std::vector<std::size_t> a;  // unary citations on the head variable
    std::optional<std::size_t> b_edge;
    std::optional<std::size_t> b_target;          // t(Y), absent when trivially true
    std::map<std::string, std::vector<std::size_t>> c;  // disconnected citations by variable
};

/// Decomposes a rule into the 𝒜 / ℬ / 𝒞 shape, or returns a description of the
/// first mismatch.
inline std::variant<RuleShape, std::string> decompose_definition_I(const Rule& r) {
    RuleShape s;
    const std::string& x = r.head_var;
    std::string y;
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        const auto& c = r.body[i];
        if (c.call) return std::string("unexpanded template invocation");
        if (!c.is_binary()) continue;
        if (s.b_edge) return std::string("more than one edge citation");
        if (c.vars[0] == c.vars[1]) return std::string("edge citation repeats a variable");
        if (c.vars[0] != x && c.vars[1] != x) return std::string("edge citation does not touch the head variable");
        s.b_edge = i;
        y = c.vars[0] == x ? c.vars[1] : c.vars[0];
    }
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        const auto& c = r.body[i];
        if (c.is_binary()) continue;
        const auto& v = c.vars[0];
        if (v == x) {
            s.a.push_back(i);
        } else if (s.b_edge && v == y) {
            if (s.b_target) return std::string("more than one citation on the edge target '" + y + "'");
            s.b_target = i;
        } else {
            s.c[v].push_back(i);
        }
    }
    return s;
}

/// Empty result means every rule has the 𝒜,ℬ,𝒞 shape and the set is stratifiable.
inline std::vector<Violation> validate_definition_I(const std::vector<Rule>& rules) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        auto d = decompose_definition_I(rules[i]);
        if (auto* msg = std::get_if<std::string>(&d)) out.push_back({i, to_string(rules[i]), "", 0, *msg, rules[i].pos});
    }
    try {
        stratify(rules);
    } catch (const StratificationError& e) {
        out.push_back({0, "", "", 0, e.what(), {}});
    }
    return out;
}

}  // namespace starquery::starlang
