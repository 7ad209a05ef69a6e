#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "../starlang/stratify.hpp"
#include "../starlang/templates.hpp"
#include "../starlang/validate.hpp"
#include "parser.hpp"
#include "stdlib.hpp"

namespace starquery::codesearch {

struct CompiledQuery {
    starlang::Program program;
    std::vector<std::string> warnings;
};

namespace detail {

class Compiler {
public:
    explicit Compiler(const PredicateConfig& config) : config_(config), expander_(prog_) {
        const auto& lib = stdlib_program();
        prog_.templates = lib.templates;
        prog_.kinds = lib.kinds;
    }

    CompiledQuery run(const Query& q) {
        std::string root = emit(q, ParamKind::Query);
        prog_.query = "__query";
        add_rule(prog_.query, {cite(root)});

        CompiledQuery out;
        prog_.templates.clear();
        out.program = std::move(prog_);
        out.warnings = std::move(warnings_);
        auto violations = starlang::validate_definition_II(out.program);
        if (!violations.empty()) throw CompileError("compiled program is invalid: " + to_string(violations.front()));
        starlang::stratify(out.program);
        return out;
    }

private:
    const PredicateConfig& config_;
    starlang::Program prog_;
    starlang::TemplateExpander expander_;
    std::map<std::tuple<std::string, int, std::string>, std::string> literals_;
    std::map<std::string, std::string> predicates_;
    std::set<std::string> resolving_;
    std::vector<std::string> warnings_;

    static starlang::Citation cite(const std::string& p, bool negated = false) {
        return starlang::Citation::unary(p, "X", negated);
    }

    void add_rule(const std::string& head, std::vector<starlang::Citation> body) {
        prog_.rules.push_back({head, "X", std::move(body), {}});
    }

    std::string invoke(const std::string& name, std::vector<std::string> args, SourcePos pos) {
        starlang::TemplateCall call{name, {}, true};
        for (auto& a : args) call.args.push_back(starlang::TemplateCall::symbol(a));
        return expander_.invoke(call, pos);
    }

    std::string emit(const Query& q, ParamKind ctx) {
        switch (q.kind) {
            case QueryKind::Literal: return literal(q, ctx);
            case QueryKind::Predicate: return predicate(q.text, q.pos);
            case QueryKind::Template: {
                const StdlibEntry* e = lookup(q.text);
                if (!e || !e->is_template()) throw CompileError(to_string(q.pos) + ": unknown template '" + q.text + "'");
                if (e->arity() != q.children.size())
                    throw CompileError(to_string(q.pos) + ": template '" + q.text + "' expects " +
                                       std::to_string(e->arity()) + " argument(s)");
                std::vector<std::string> args;
                for (std::size_t i = 0; i < q.children.size(); ++i) args.push_back(emit(q.children[i], e->params[i]));
                return invoke(q.text, std::move(args), q.pos);
            }
            case QueryKind::Not: {
                std::string inner = emit(q.children.at(0), ctx);
                std::string h = prog_.fresh("q");
                add_rule(h, {cite(inner, true)});
                return h;
            }
            case QueryKind::And: {
                std::vector<starlang::Citation> body;
                for (auto& c : q.children) {
                    if (c.kind == QueryKind::Not) body.push_back(cite(emit(c.children.at(0), ctx), true));
                    else body.push_back(cite(emit(c, ctx)));
                }
                std::string h = prog_.fresh("q");
                add_rule(h, std::move(body));
                return h;
            }
            case QueryKind::Or: {
                std::vector<std::string> parts;
                for (auto& c : q.children) parts.push_back(emit(c, ctx));
                std::string h = prog_.fresh("q");
                for (auto& p : parts) add_rule(h, {cite(p)});
                return h;
            }
        }
        throw CompileError("unreachable query node");
    }

    std::string literal_relation(const std::string& attr, const Query& q) {
        auto key = std::make_tuple(attr, static_cast<int>(q.literal), q.text);
        if (auto it = literals_.find(key); it != literals_.end()) return it->second;
        std::string sym = prog_.fresh("l");
        prog_.literals[sym] = {attr, q.literal == LiteralKind::Regex ? LiteralMatcher::regex(q.text)
                                                                     : LiteralMatcher::exact(q.text)};
        literals_.emplace(key, sym);
        return sym;
    }

    std::string literal(const Query& q, ParamKind ctx) {
        if (q.literal == LiteralKind::Wildcard) return predicate("Any", q.pos);
        switch (ctx) {
            case ParamKind::ArgName: return literal_relation("arg_name", q);
            case ParamKind::Function: return invoke("CallExpression", {literal_relation("name", q)}, q.pos);
            case ParamKind::Declaration: return invoke("FunctionDecl", {literal_relation("name", q)}, q.pos);
            default: return literal_relation("name", q);
        }
    }

    std::string predicate(const std::string& name, SourcePos pos) {
        if (auto it = predicates_.find(name); it != predicates_.end()) return it->second;
        if (auto b = config_.predicates.find(name); b != config_.predicates.end()) {
            if (!resolving_.insert(name).second)
                throw CompileError(to_string(pos) + ": predicate configuration is cyclic through '" + name + "'");
            std::string body;
            if (b->second.tag) {
                body = *b->second.tag;
            } else {
                Query sub;
                try {
                    sub = parse_codesearch(*b->second.query, &config_);
                } catch (const ParseError& e) {
                    throw CompileError("in configured predicate '" + name + "' at " + to_string(e.pos()) + ": " +
                                       e.message());
                }
                body = emit(sub, ParamKind::Query);
            }
            resolving_.erase(name);
            add_rule(name, {cite(body)});
        } else if (name == "Any") {
            add_rule(name, {});
        } else if (name == "None") {
            add_rule(name, {cite(predicate("Any", pos), true)});
        } else {
            warnings_.push_back("predicate '" + name + "' is not configured and matches nothing");
        }
        predicates_.emplace(name, name);
        return name;
    }
};

}  // namespace detail

/// Translates a parsed query into a StarLang program whose query predicate
/// holds exactly for the matching nodes.
inline CompiledQuery compile_query(const Query& q, const PredicateConfig& config = demo_config()) {
    return detail::Compiler(config).run(q);
}

inline starlang::Program compile(const Query& q, const PredicateConfig& config = demo_config()) {
    return compile_query(q, config).program;
}

}  // namespace starquery::codesearch
