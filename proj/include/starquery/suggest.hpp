#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "codesearch/parser.hpp"
#include "codesearch/stdlib.hpp"
#include "factstore.hpp"

namespace starquery::suggest {

using Counts = std::map<std::string, std::size_t>;

/// Per-database caches. Every count is exact for the database it was built from.
struct SuggestionIndex {
    Counts call_names;         // CallExpression name -> nodes
    Counts declaration_names;  // FunctionDecl name -> nodes
    Counts value_names;        // literal-node value -> nodes
    Counts annotation_names;   // annotation name -> annotated entities
    Counts file_paths;         // file path -> entities in the file
    Counts arg_names;          // named-argument name -> nodes
    std::array<std::size_t, kNodeKindNames.size()> kind_counts{};
    Counts stdlib_evidence;    // stdlib name -> cheap non-emptiness estimate, 0 if unknown
    std::size_t active_domain = 0;

    friend bool operator==(const SuggestionIndex&, const SuggestionIndex&) = default;
};

enum class SuggestionKind { Template, Predicate, Literal, Keyword };

inline std::string_view kind_name(SuggestionKind k) {
    static constexpr std::string_view names[] = {"template", "predicate", "literal", "keyword"};
    return names[static_cast<int>(k)];
}

struct Suggestion {
    std::string text;    // the candidate itself
    std::string insert;  // what replaces the prefix so the query still parses
    SuggestionKind kind = SuggestionKind::Literal;
    std::size_t evidence = 0;
    std::size_t rank = 0;

    friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

enum class Context { Operand, LiteralArgument, PredicateName, Connective };

inline std::string_view context_name(Context c) {
    static constexpr std::string_view names[] = {"operand", "literal-argument", "predicate-name", "connective"};
    return names[static_cast<int>(c)];
}

struct SuggestionList {
    Context context = Context::Operand;
    std::string template_name;  // enclosing template, when any
    codesearch::ParamKind param = codesearch::ParamKind::Query;
    std::string prefix;
    std::size_t replace_from = 0;  // byte offset where the prefix starts
    std::vector<Suggestion> items;

    friend bool operator==(const SuggestionList&, const SuggestionList&) = default;
};

namespace detail {

inline std::size_t distinct_sources(const Database& db, std::initializer_list<std::string> rels) {
    std::set<NodeId> s;
    for (auto& r : rels)
        if (auto* b = db.binary(r))
            for (auto& [x, y] : b->pairs()) s.insert(x);
    return s.size();
}

inline std::size_t distinct_targets(const Database& db, std::initializer_list<std::string> rels) {
    std::set<NodeId> s;
    for (auto& r : rels)
        if (auto* b = db.binary(r))
            for (auto& [x, y] : b->pairs()) s.insert(y);
    return s.size();
}

inline Counts per_target_name(const Database& db, const std::string& rel) {
    std::set<std::pair<std::string, NodeId>> seen;
    if (auto* b = db.binary(rel))
        for (auto& [x, y] : b->pairs())
            if (auto* n = db.node(y).attr("name")) seen.emplace(*n, x);
    Counts out;
    for (auto& [name, x] : seen) ++out[name];
    return out;
}

}  // namespace detail

inline SuggestionIndex build_index(const Database& db) {
    using namespace std::string_literals;
    SuggestionIndex ix;
    ix.active_domain = db.size();
    for (auto& n : db.nodes()) {
        ++ix.kind_counts[static_cast<std::size_t>(n.kind)];
        const std::string* name = n.attr("name");
        if (name) {
            switch (n.kind) {
                case NodeKind::CallExpression: ++ix.call_names[*name]; break;
                case NodeKind::FunctionDecl: ++ix.declaration_names[*name]; break;
                case NodeKind::StringLiteral:
                case NodeKind::NumberLiteral:
                case NodeKind::BooleanLiteral: ++ix.value_names[*name]; break;
                default: break;
            }
        }
        if (auto* a = n.attr("arg_name")) ++ix.arg_names[*a];
    }
    ix.annotation_names = detail::per_target_name(db, "annotated_by");
    ix.file_paths = detail::per_target_name(db, "in_file");

    auto kind = [&](NodeKind k) { return ix.kind_counts[static_cast<std::size_t>(k)]; };
    auto& ev = ix.stdlib_evidence;
    for (auto& e : codesearch::stdlib()) ev[e.name] = 0;
    ev["Any"] = db.size();
    for (auto& e : codesearch::stdlib())
        if (!e.is_template())
            if (auto* u = db.unary(e.name)) ev[e.name] = u->members.size();
    ev["CallExpression"] = kind(NodeKind::CallExpression);
    ev["Identifier"] = kind(NodeKind::Identifier);
    ev["StringLiteral"] = kind(NodeKind::StringLiteral);
    ev["NumberLiteral"] = kind(NodeKind::NumberLiteral);
    ev["BooleanLiteral"] = kind(NodeKind::BooleanLiteral);
    ev["Literal"] = kind(NodeKind::StringLiteral) + kind(NodeKind::NumberLiteral) + kind(NodeKind::BooleanLiteral);
    for (int i = 0; i < 8; ++i) {
        std::string r = "arg" + std::to_string(i);
        ev["Arg" + std::to_string(i) + "In"] = detail::distinct_targets(db, {r});
        ev["HasArg" + std::to_string(i)] = detail::distinct_sources(db, {r});
    }
    for (int i = 1; i < 8; ++i)
        ev["Param" + std::to_string(i) + "In"] = detail::distinct_targets(db, {"param" + std::to_string(i)});
    ev["ExplicitSelfParamIn"] = detail::distinct_targets(db, {"param_self"});
    ev["AnyParamIn"] = detail::distinct_targets(
        db, {"param1"s, "param2"s, "param3"s, "param4"s, "param5"s, "param6"s, "param7"s, "param_self"s});
    ev["HasAnyArg"] = detail::distinct_sources(
        db, {"arg0"s, "arg1"s, "arg2"s, "arg3"s, "arg4"s, "arg5"s, "arg6"s, "arg7"s, "named_arg"s});
    ev["HasNamedArg"] = detail::distinct_sources(db, {"named_arg"});
    ev["NamedArgIn"] = detail::distinct_targets(db, {"named_arg"});
    ev["DataFlowAfter"] = detail::distinct_targets(db, {"dataflow"});
    ev["DataFlowsFrom"] = detail::distinct_targets(db, {"taint"});
    ev["DataFlowsInto"] = detail::distinct_sources(db, {"taint"});
    ev["Taint"] = detail::distinct_targets(db, {"taint"});
    ev["ForSameObject"] = detail::distinct_sources(db, {"same_object"});
    ev["HasAnnotation"] = detail::distinct_sources(db, {"annotated_by"});
    ev["InPath"] = detail::distinct_sources(db, {"in_file"});
    ev["Returns"] = detail::distinct_sources(db, {"returns"});
    ev["ReturnedBy"] = detail::distinct_sources(db, {"returned_by"});
    return ix;
}

namespace detail {

using codesearch::CTok;
using codesearch::CToken;
using codesearch::ParamKind;

struct Frame {
    std::string name;  // empty for a parenthesis
    std::size_t arg = 0;
};

inline bool bare_safe(const std::string& s) {
    if (s.empty() || !(is_ident_start(s[0]) || s[0] == '$')) return false;
    if (!std::all_of(s.begin(), s.end(), codesearch::is_word_char)) return false;
    if (s == "and" || s == "or" || s == "not" || s == "PRED") return false;
    return codesearch::lookup(s) == nullptr;
}

inline const Counts* literal_source(const SuggestionIndex& ix, ParamKind k) {
    switch (k) {
        case ParamKind::Callee:
        case ParamKind::Function: return &ix.call_names;
        case ParamKind::Declaration: return &ix.declaration_names;
        case ParamKind::Annotation: return &ix.annotation_names;
        case ParamKind::Path: return &ix.file_paths;
        case ParamKind::ArgName: return &ix.arg_names;
        case ParamKind::Value: return &ix.value_names;
        case ParamKind::Query: return nullptr;
    }
    return nullptr;
}

}  // namespace detail

/// Completions for the partial query at `cursor`. Reads only the index.
inline SuggestionList suggest(const SuggestionIndex& ix, std::string_view text, std::size_t cursor) {
    using detail::CTok;
    cursor = std::min(cursor, text.size());
    auto toks = codesearch::tokenize_codesearch(text.substr(0, cursor), true);
    if (!toks.empty() && toks.back().kind == CTok::End) toks.pop_back();

    SuggestionList out;
    out.replace_from = cursor;
    bool open_string = false;
    bool pred_prefix = false;
    if (!toks.empty() && toks.back().end == cursor) {
        const auto& t = toks.back();
        bool partial = t.kind == CTok::Word || t.kind == CTok::Pred || (t.kind == CTok::String && t.open);
        if (partial) {
            out.prefix = t.text;
            out.replace_from = t.pos.offset;
            open_string = t.kind == CTok::String;
            pred_prefix = t.kind == CTok::Pred;
            toks.pop_back();
        }
    }

    std::vector<detail::Frame> stack;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind == CTok::Word && i + 1 < toks.size() && toks[i + 1].kind == CTok::Lt) {
            stack.push_back({t.text, 0});
            ++i;
        } else if (t.kind == CTok::LParen) {
            stack.push_back({"", 0});
        } else if (t.kind == CTok::Comma) {
            if (!stack.empty()) ++stack.back().arg;
        } else if (t.kind == CTok::Gt || t.kind == CTok::RParen) {
            if (!stack.empty()) stack.pop_back();
        }
    }

    CTok last = toks.empty() ? CTok::LParen : toks.back().kind;
    bool operand = last == CTok::LParen || last == CTok::And || last == CTok::Or || last == CTok::Not ||
                   last == CTok::Lt || last == CTok::Comma;
    if (pred_prefix) {
        out.context = Context::PredicateName;
    } else if (!operand && !open_string) {
        out.context = Context::Connective;
    } else {
        out.context = Context::Operand;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            if (it->name.empty()) continue;
            if (auto* e = codesearch::lookup(it->name); e && e->is_template() && it->arg < e->arity()) {
                out.template_name = it->name;
                out.param = e->params[it->arg];
                if (out.param != detail::ParamKind::Query && out.param != detail::ParamKind::Value)
                    out.context = Context::LiteralArgument;
            }
            break;
        }
        if (open_string) out.context = Context::LiteralArgument;
    }

    auto matches_prefix = [&](const std::string& s) { return s.compare(0, out.prefix.size(), out.prefix) == 0; };
    auto add = [&](std::string s, SuggestionKind k, std::size_t ev) {
        if (!matches_prefix(s)) return;
        std::string ins;
        if (k != SuggestionKind::Literal) ins = s;
        else if (open_string) ins = codesearch::detail::quote(s, false);
        else ins = detail::bare_safe(s) ? s : codesearch::detail::quote(s, false);
        out.items.push_back({std::move(s), std::move(ins), k, ev, 0});
    };

    switch (out.context) {
        case Context::Connective:
            add("and", SuggestionKind::Keyword, 0);
            add("or", SuggestionKind::Keyword, 0);
            break;
        case Context::PredicateName:
            for (auto& e : codesearch::stdlib())
                if (!e.is_template()) add(e.name, SuggestionKind::Predicate, ix.stdlib_evidence.at(e.name));
            for (auto& it : out.items) it.insert = "PRED:" + it.text;
            break;
        case Context::LiteralArgument:
        case Context::Operand: {
            const Counts* lits = out.template_name.empty() ? nullptr : detail::literal_source(ix, out.param);
            if (open_string && !lits) lits = &ix.call_names;
            if (lits)
                for (auto& [name, n] : *lits) add(name, SuggestionKind::Literal, n);
            if (out.context == Context::Operand)
                for (auto& e : codesearch::stdlib())
                    add(e.name, e.is_template() ? SuggestionKind::Template : SuggestionKind::Predicate,
                        ix.stdlib_evidence.at(e.name));
            break;
        }
    }

    std::stable_sort(out.items.begin(), out.items.end(), [](const Suggestion& a, const Suggestion& b) {
        if (a.evidence != b.evidence) return a.evidence > b.evidence;
        if (a.text != b.text) return a.text < b.text;
        return a.kind < b.kind;
    });
    for (std::size_t i = 0; i < out.items.size(); ++i) out.items[i].rank = i + 1;
    return out;
}

inline nlohmann::json to_json(const SuggestionList& s) {
    nlohmann::json items = nlohmann::json::array();
    for (auto& i : s.items)
        items.push_back({{"evidence", i.evidence},
                         {"insert", i.insert},
                         {"kind", kind_name(i.kind)},
                         {"rank", i.rank},
                         {"text", i.text}});
    nlohmann::json out = {{"context", context_name(s.context)},
                          {"prefix", s.prefix},
                          {"replace_from", s.replace_from},
                          {"suggestions", items}};
    if (!s.template_name.empty()) {
        out["template"] = s.template_name;
        out["parameter"] = codesearch::param_kind_name(s.param);
    }
    return out;
}

}  // namespace starquery::suggest
