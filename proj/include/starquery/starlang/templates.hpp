#pragma once

#include <map>
#include <string>
#include <vector>

#include "ast.hpp"
#include "parser.hpp"

namespace starquery::starlang {

struct ExpansionStats {
    std::size_t expansions = 0;  // template bodies instantiated
    std::size_t memo_hits = 0;
};

/// Expands template invocations into fresh rules. Instantiations are memoized
/// on (template name, resolved argument symbols); the memo entry is recorded
/// before the body is instantiated, so self-instantiations resolve to the
/// symbol being defined and recursion terminates.
class TemplateExpander {
public:
    explicit TemplateExpander(Program& prog) : prog_(prog) {}

    /// Resolves an invocation to the fresh predicate symbol that denotes it.
    std::string invoke(const TemplateCall& call, SourcePos pos = {}) {
        if (!call.is_call) return call.name;
        auto it = prog_.templates.find(call.name);
        if (it == prog_.templates.end()) throw CompileError(to_string(pos) + ": unknown template '" + call.name + "'");
        const TemplateDef& def = it->second;
        if (def.holes.size() != call.args.size())
            throw CompileError(to_string(pos) + ": template '" + call.name + "' expects " +
                               std::to_string(def.holes.size()) + " argument(s), got " +
                               std::to_string(call.args.size()));
        std::vector<std::string> args;
        for (auto& a : call.args) args.push_back(invoke(a, pos));

        auto key = std::make_pair(call.name, args);
        if (auto m = memo_.find(key); m != memo_.end()) {
            ++stats_.memo_hits;
            return m->second;
        }
        ++stats_.expansions;

        // Holes map to arguments; every head defined in the body gets a fresh name.
        std::map<std::string, std::string> subst;
        for (std::size_t i = 0; i < args.size(); ++i) subst[def.holes[i]] = args[i];
        for (auto& r : def.body)
            if (!subst.count(r.head)) subst[r.head] = prog_.fresh("x" + def.name);
        const std::string result = subst.at(def.result);
        memo_.emplace(key, result);

        std::vector<Rule> rules;
        for (const Rule& pattern : def.body) {
            Rule r = pattern;
            r.head = subst.at(r.head);
            for (auto& c : r.body) {
                if (c.call) {
                    TemplateCall inst = substitute(*c.call, subst);
                    c.predicate = invoke(inst, c.pos);
                    c.call.reset();
                } else if (auto s = subst.find(c.predicate); s != subst.end()) {
                    c.predicate = s->second;
                }
            }
            rules.push_back(std::move(r));
        }
        for (auto& r : rules) prog_.rules.push_back(std::move(r));
        return result;
    }

    /// Replaces every invocation citation in the program's own rules.
    void expand_all() {
        for (std::size_t i = 0; i < prog_.rules.size(); ++i) {
            for (std::size_t j = 0; j < prog_.rules[i].body.size(); ++j) {
                if (!prog_.rules[i].body[j].call) continue;
                TemplateCall call = *prog_.rules[i].body[j].call;
                SourcePos pos = prog_.rules[i].body[j].pos;
                std::string sym = invoke(call, pos);  // may grow prog_.rules
                prog_.rules[i].body[j].predicate = sym;
                prog_.rules[i].body[j].call.reset();
            }
        }
    }

    const ExpansionStats& stats() const { return stats_; }

private:
    static TemplateCall substitute(const TemplateCall& c, const std::map<std::string, std::string>& subst) {
        TemplateCall out = c;
        if (!c.is_call) {
            if (auto s = subst.find(c.name); s != subst.end()) out.name = s->second;
            return out;
        }
        for (auto& a : out.args) a = substitute(a, subst);
        return out;
    }

    Program& prog_;
    std::map<std::pair<std::string, std::vector<std::string>>, std::string> memo_;
    ExpansionStats stats_;
};

/// Checks template definitions: every hole is used and the result is defined.
inline void check_templates(const Program& p) {
    auto uses = [](const TemplateCall& c, const std::string& h, auto&& self) -> bool {
        if (c.name == h) return true;
        for (auto& a : c.args)
            if (self(a, h, self)) return true;
        return false;
    };
    for (auto& [name, def] : p.templates) {
        bool has_result = false;
        for (auto& r : def.body) has_result |= r.head == def.result;
        if (!has_result)
            throw CompileError(to_string(def.pos) + ": template '" + name + "' never defines '" + def.result + "'");
        for (auto& h : def.holes) {
            bool used = false;
            for (auto& r : def.body)
                for (auto& c : r.body) used |= c.call ? uses(*c.call, h, uses) : c.predicate == h;
            if (!used) throw CompileError(to_string(def.pos) + ": hole '" + h + "' of template '" + name + "' is unused");
        }
    }
}

/// Expands every invocation in place and returns expansion statistics.
inline ExpansionStats expand_templates(Program& p) {
    check_templates(p);
    TemplateExpander ex(p);
    ex.expand_all();
    return ex.stats();
}

/// Expands a single invocation into `p`, returning its denoting symbol.
inline std::string expand_templates(Program& p, const TemplateCall& invocation) {
    TemplateExpander ex(p);
    return ex.invoke(invocation);
}

}  // namespace starquery::starlang
