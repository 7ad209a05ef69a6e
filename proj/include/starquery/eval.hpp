#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "factstore.hpp"
#include "log.hpp"
#include "starlang/normalize.hpp"
#include "starlang/stratify.hpp"
#include "starlang/templates.hpp"
#include "starlang/validate.hpp"

namespace starquery {

struct EvalMetrics {
    std::size_t iterations = 0;  // productive rounds, summed over strata
    std::size_t rounds = 0;      // including each stratum's final empty round
    std::vector<std::size_t> stratum_iterations;
    std::size_t join_steps = 0;           // unary ⋈ binary steps
    std::size_t unary_operand_joins = 0;  // join steps whose left operand is a unary set
    std::size_t index_probes = 0;         // adjacency lookups
    std::size_t rule_firings = 0;
    std::size_t derived_facts = 0;
    std::size_t program_rules = 0;
    std::size_t program_citations = 0;
    std::size_t active_domain = 0;
    double wall_time_ms = 0;
};

/// Ready-to-run form: templates expanded, validated, normalized, stratified.
struct PreparedProgram {
    starlang::Program program;
    starlang::Stratification strata;
    starlang::ExpansionStats expansion;
    std::string query;
};

class ValidationError : public CompileError {
public:
    explicit ValidationError(std::vector<starlang::Violation> v)
        : CompileError(starlang::to_string(v.front())), violations_(std::move(v)) {}
    const std::vector<starlang::Violation>& violations() const { return violations_; }

private:
    std::vector<starlang::Violation> violations_;
};

inline PreparedProgram prepare(starlang::Program prog) {
    PreparedProgram out;
    out.query = prog.query_predicate();
    out.expansion = starlang::expand_templates(prog);
    auto violations = starlang::validate_definition_II(prog);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    starlang::normalize_program(prog);
    out.strata = starlang::stratify(prog);
    out.program = std::move(prog);
    return out;
}

struct StratumState {
    std::vector<std::string> predicates;
    std::map<std::string, std::vector<NodeId>> totals;
    std::size_t iterations = 0;
};

struct EvalResult {
    std::string query;
    std::vector<NodeId> matches;  // ascending
    EvalMetrics metrics;
    std::vector<std::string> warnings;
    std::map<std::string, std::vector<NodeId>> relations;  // every intensional predicate
    std::vector<StratumState> strata;
};

/// Number of evaluate() calls made by this process.
inline std::atomic<std::uint64_t>& evaluation_counter() {
    static std::atomic<std::uint64_t> n{0};
    return n;
}

namespace detail {

class Evaluator {
public:
    Evaluator(const PreparedProgram& prep, const Database& db) : prep_(prep), db_(db), empty_(db.size()) {}

    EvalResult run() {
        auto start = std::chrono::steady_clock::now();
        const auto& prog = prep_.program;
        m_.program_rules = prog.rules.size();
        for (auto& r : prog.rules) m_.program_citations += r.body.size();
        m_.active_domain = db_.size();

        for (auto& r : prog.rules)
            if (!idb_index_.count(r.head)) {
                idb_index_[r.head] = idb_.size();
                idb_.push_back(Idb{r.head, NodeSet(db_.size()), {}, NodeSet(db_.size())});
            }
        for (auto& r : prog.rules) rules_.push_back(compile(r));

        EvalResult res;
        for (std::size_t s = 0; s < prep_.strata.strata.size(); ++s) {
            std::size_t it = run_stratum(s);
            m_.stratum_iterations.push_back(it);
            m_.iterations += it;
            if (keep_strata_) {
                StratumState st{prep_.strata.strata[s], {}, it};
                for (auto& p : st.predicates) st.totals[p] = idb_[idb_index_.at(p)].total.sorted();
                res.strata.push_back(std::move(st));
            }
        }

        res.query = prep_.query;
        if (!res.query.empty()) res.matches = resolve(res.query).sorted();
        for (auto& i : idb_) res.relations[i.name] = i.total.sorted();
        res.warnings = std::move(warnings_);
        m_.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        res.metrics = m_;
        return res;
    }

    bool keep_strata_ = false;

private:
    struct Idb {
        std::string name;
        NodeSet total;
        std::vector<NodeId> delta;
        NodeSet fresh;
    };
    struct Lit {
        const NodeSet* set = nullptr;
        std::optional<std::size_t> idb;  // set when the predicate is intensional
        bool negated = false;
        bool holds(NodeId x) const { return set->contains(x) != negated; }
    };
    struct Edge {
        const BinaryRelation* rel = nullptr;
        bool head_first = true;  // e(X, Y) rather than e(Y, X)
        std::optional<Lit> target;
    };
    struct CompiledRule {
        std::size_t head;
        std::vector<Lit> a;
        std::optional<Edge> b;
        std::vector<std::vector<Lit>> c;
        std::size_t stratum;
        bool gate_open = false;
    };

    const NodeSet& resolve(const std::string& name) {
        if (auto it = idb_index_.find(name); it != idb_index_.end()) return idb_[it->second].total;
        if (auto it = edb_cache_.find(name); it != edb_cache_.end()) return *it->second;
        const NodeSet* set = nullptr;
        const auto& prog = prep_.program;
        if (auto l = prog.literals.find(name); l != prog.literals.end()) {
            auto rel = db_.materialize_literal_relation(l->second.attribute, l->second.matcher);
            held_.push_back(rel);
            set = &rel->members;
        } else if (auto k = prog.kinds.find(name); k != prog.kinds.end()) {
            set = &db_.nodes_of_kind(k->second);
        } else if (auto* u = db_.unary(name)) {
            set = &u->members;
        } else {
            warn("unknown unary predicate '" + name + "' resolves to the empty relation");
            set = &empty_;
        }
        edb_cache_[name] = set;
        return *set;
    }

    const BinaryRelation* resolve_binary(const std::string& name) {
        if (auto* b = db_.binary(name)) return b;
        warn("unknown binary predicate '" + name + "' resolves to the empty relation");
        return &empty_binary_;
    }

    void warn(std::string msg) {
        if (std::find(warnings_.begin(), warnings_.end(), msg) != warnings_.end()) return;
        logger().warn("{}", msg);
        warnings_.push_back(std::move(msg));
    }

    Lit lit(const starlang::Citation& c) {
        Lit l;
        l.set = &resolve(c.predicate);
        if (auto it = idb_index_.find(c.predicate); it != idb_index_.end()) l.idb = it->second;
        l.negated = c.negated;
        return l;
    }

    CompiledRule compile(const starlang::Rule& r) {
        auto shape = starlang::decompose_definition_I(r);
        auto* s = std::get_if<starlang::RuleShape>(&shape);
        if (!s) throw CompileError("internal: rule not in normal form: " + starlang::to_string(r));
        CompiledRule cr;
        cr.head = idb_index_.at(r.head);
        cr.stratum = prep_.strata.stratum_of(r.head);
        for (auto i : s->a) cr.a.push_back(lit(r.body[i]));
        if (s->b_edge) {
            const auto& e = r.body[*s->b_edge];
            Edge edge{resolve_binary(e.predicate), e.vars[0] == r.head_var, std::nullopt};
            if (s->b_target) edge.target = lit(r.body[*s->b_target]);
            cr.b = edge;
        }
        for (auto& [var, idx] : s->c) {
            std::vector<Lit> g;
            for (auto i : idx) g.push_back(lit(r.body[i]));
            cr.c.push_back(std::move(g));
        }
        return cr;
    }

    bool recursive(const Lit& l, std::size_t stratum) const {
        return l.idb && !l.negated && prep_.strata.stratum_of(idb_[*l.idb].name) == stratum;
    }

    // Nodes adjacent to x on the far side of the edge.
    std::span<const NodeId> far(const Edge& e, NodeId x) {
        ++m_.index_probes;
        return e.head_first ? e.rel->successors(x) : e.rel->predecessors(x);
    }
    // Nodes adjacent to y on the head side of the edge.
    std::span<const NodeId> near(const Edge& e, NodeId y) {
        ++m_.index_probes;
        return e.head_first ? e.rel->predecessors(y) : e.rel->successors(y);
    }

    bool edge_holds(const Edge& e, NodeId x) {
        ++m_.join_steps;
        ++m_.unary_operand_joins;
        for (NodeId y : far(e, x))
            if (!e.target || e.target->holds(y)) return true;
        return false;
    }

    bool gate(const std::vector<Lit>& group) {
        const Lit* driver = nullptr;
        for (auto& l : group)
            if (!l.negated && (!driver || l.set->size() < driver->set->size())) driver = &l;
        auto all = [&](NodeId z) {
            return std::all_of(group.begin(), group.end(), [&](const Lit& l) { return l.holds(z); });
        };
        if (driver) return std::any_of(driver->set->members().begin(), driver->set->members().end(), all);
        for (NodeId z = 0; z < db_.size(); ++z)
            if (all(z)) return true;
        return false;
    }

    void derive(CompiledRule& r, NodeId x) {
        Idb& h = idb_[r.head];
        if (h.total.contains(x) || h.fresh.contains(x)) return;
        h.fresh.insert(x);
        ++m_.derived_facts;
    }

    // Full check of the non-driver conditions for candidate x.
    bool passes(CompiledRule& r, NodeId x, const Lit* skip_a, bool skip_b) {
        for (auto& l : r.a)
            if (&l != skip_a && !l.holds(x)) return false;
        if (r.b && !skip_b && !edge_holds(*r.b, x)) return false;
        return true;
    }

    // Unary ⋈ binary step: project the edge onto the head column, restricted to `ys`.
    template <class Ys>
    void join_from_target(CompiledRule& r, const Ys& ys) {
        ++m_.join_steps;
        ++m_.unary_operand_joins;
        for (NodeId y : ys)
            for (NodeId x : near(*r.b, y))
                if (passes(r, x, nullptr, true)) derive(r, x);
    }

    void fire_full(CompiledRule& r) {
        ++m_.rule_firings;
        const Lit* driver = nullptr;
        for (auto& l : r.a)
            if (!l.negated && (!driver || l.set->size() < driver->set->size())) driver = &l;
        if (driver) {
            for (NodeId x : driver->set->members())
                if (passes(r, x, driver, false)) derive(r, x);
        } else if (r.b && r.b->target && !r.b->target->negated) {
            join_from_target(r, r.b->target->set->members());
        } else if (r.b) {
            ++m_.join_steps;
            ++m_.unary_operand_joins;
            for (auto& [src, dst] : r.b->rel->pairs()) {
                NodeId x = r.b->head_first ? src : dst;
                NodeId y = r.b->head_first ? dst : src;
                if ((!r.b->target || r.b->target->holds(y)) && passes(r, x, nullptr, true)) derive(r, x);
            }
        } else {
            for (NodeId x = 0; x < db_.size(); ++x)
                if (passes(r, x, nullptr, true)) derive(r, x);
        }
    }

    void fire_delta(CompiledRule& r, std::size_t stratum) {
        for (auto& l : r.a) {
            if (!recursive(l, stratum) || idb_[*l.idb].delta.empty()) continue;
            ++m_.rule_firings;
            for (NodeId x : idb_[*l.idb].delta)
                if (passes(r, x, &l, false)) derive(r, x);
        }
        if (r.b && r.b->target && recursive(*r.b->target, stratum)) {
            const auto& d = idb_[*r.b->target->idb].delta;
            if (!d.empty()) {
                ++m_.rule_firings;
                join_from_target(r, d);
            }
        }
    }

    bool gates_open(CompiledRule& r) {
        for (auto& g : r.c)
            if (!gate(g)) return false;
        return true;
    }

    std::size_t run_stratum(std::size_t s) {
        std::vector<CompiledRule*> rules;
        for (auto& r : rules_)
            if (r.stratum == s) rules.push_back(&r);
        std::vector<std::size_t> heads;
        for (auto* r : rules)
            if (std::find(heads.begin(), heads.end(), r->head) == heads.end()) heads.push_back(r->head);

        std::size_t productive = 0;
        for (bool first = true;; first = false) {
            ++m_.rounds;
            for (auto* r : rules) {
                bool was_open = r->gate_open;
                if (!r->c.empty() && (first || !was_open)) r->gate_open = gates_open(*r);
                if (r->c.empty()) r->gate_open = true;
                if (!r->gate_open) continue;
                if (first || !was_open) fire_full(*r);
                else fire_delta(*r, s);
            }
            bool any = false;
            for (auto h : heads) {
                Idb& i = idb_[h];
                i.delta = i.fresh.members();
                for (NodeId x : i.delta) i.total.insert(x);
                i.fresh.clear();
                any |= !i.delta.empty();
            }
            if (!any) break;
            ++productive;
        }
        for (auto h : heads) idb_[h].delta.clear();
        return productive;
    }

    const PreparedProgram& prep_;
    const Database& db_;
    NodeSet empty_;
    BinaryRelation empty_binary_;
    std::vector<Idb> idb_;
    std::map<std::string, std::size_t> idb_index_;
    std::map<std::string, const NodeSet*> edb_cache_;
    std::vector<std::shared_ptr<const UnaryRelation>> held_;
    std::vector<CompiledRule> rules_;
    std::vector<std::string> warnings_;
    EvalMetrics m_;
};

}  // namespace detail

/// Stratified semi-naive evaluation of a prepared program.
inline EvalResult evaluate(const PreparedProgram& prep, const Database& db) {
    ++evaluation_counter();
    detail::Evaluator ev(prep, db);
    return ev.run();
}

inline EvalResult evaluate(const starlang::Program& prog, const Database& db) { return evaluate(prepare(prog), db); }

/// Like evaluate(), but also reports each stratum's totals as it completes.
inline std::vector<StratumState> evaluate_incremental_strata(const PreparedProgram& prep, const Database& db) {
    ++evaluation_counter();
    detail::Evaluator ev(prep, db);
    ev.keep_strata_ = true;
    return ev.run().strata;
}

}  // namespace starquery
