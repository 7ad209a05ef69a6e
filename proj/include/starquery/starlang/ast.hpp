#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../common.hpp"
#include "../factstore.hpp"

namespace starquery::starlang {

/// A template argument: either a plain predicate symbol or a nested invocation.
struct TemplateCall {
    std::string name;
    std::vector<TemplateCall> args;
    bool is_call = false;

    static TemplateCall symbol(std::string s) { return {std::move(s), {}, false}; }

    friend bool operator==(const TemplateCall&, const TemplateCall&) = default;
};

/// One body atom. `vars` has one or two entries; binary citations are never
/// negated. When `call` is set the atom cites a template invocation whose
/// predicate is only known after expansion.
struct Citation {
    bool negated = false;
    std::string predicate;
    std::vector<std::string> vars;
    std::optional<TemplateCall> call;
    SourcePos pos;

    std::size_t arity() const { return vars.size(); }
    bool is_unary() const { return vars.size() == 1; }
    bool is_binary() const { return vars.size() == 2; }

    static Citation unary(std::string pred, std::string var, bool negated = false) {
        return Citation{negated, std::move(pred), {std::move(var)}, std::nullopt, {}};
    }
    static Citation binary(std::string pred, std::string a, std::string b) {
        return Citation{false, std::move(pred), {std::move(a), std::move(b)}, std::nullopt, {}};
    }

    friend bool operator==(const Citation& a, const Citation& b) {
        return a.negated == b.negated && a.predicate == b.predicate && a.vars == b.vars && a.call == b.call;
    }
};

/// A monadic rule `head(head_var) :- body.`
struct Rule {
    std::string head;
    std::string head_var;
    std::vector<Citation> body;
    SourcePos pos;

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.head == b.head && a.head_var == b.head_var && a.body == b.body;
    }
};

struct TemplateDef {
    std::string name;
    std::vector<std::string> holes;
    std::vector<Rule> body;
    std::string result;  // the head inside `body` that the invocation denotes
    SourcePos pos;

    friend bool operator==(const TemplateDef& a, const TemplateDef& b) {
        return a.name == b.name && a.holes == b.holes && a.body == b.body && a.result == b.result;
    }
};

/// `.literal sym attr "text".` binds `sym` to nodes whose attribute matches.
struct LiteralBinding {
    std::string attribute;
    LiteralMatcher matcher;

    friend bool operator==(const LiteralBinding&, const LiteralBinding&) = default;
};

struct Program {
    std::vector<Rule> rules;
    std::map<std::string, TemplateDef> templates;
    std::map<std::string, LiteralBinding> literals;
    std::map<std::string, NodeKind> kinds;  // `.kind sym Kind.`
    std::string query;
    std::size_t fresh_counter = 0;

    /// Fresh predicate names are `__<prefix><N>` with one monotone counter per program.
    std::string fresh(const std::string& prefix) { return "__" + prefix + std::to_string(++fresh_counter); }

    /// The distinguished query predicate; defaults to the last rule's head.
    std::string query_predicate() const {
        if (!query.empty()) return query;
        return rules.empty() ? std::string() : rules.back().head;
    }

    bool is_bound_edb(const std::string& sym) const { return literals.count(sym) || kinds.count(sym); }

    friend bool operator==(const Program& a, const Program& b) {
        return a.rules == b.rules && a.templates == b.templates && a.literals == b.literals && a.kinds == b.kinds &&
               a.query == b.query;
    }
};

}  // namespace starquery::starlang
