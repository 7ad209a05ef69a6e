#pragma once

#include <string>
#include <vector>

#include "../common.hpp"

namespace starquery::codesearch {

enum class QueryKind { And, Or, Not, Template, Predicate, Literal };

enum class LiteralKind { Exact, Regex, Wildcard };

/// One node of a Codesearch expression. Bare names that are neither
/// stdlib predicates nor templates become exact literals during parsing.
struct Query {
    QueryKind kind = QueryKind::Literal;
    std::string text;  // template/predicate name or literal body
    LiteralKind literal = LiteralKind::Exact;
    bool prefixed = false;  // written as PRED:Name
    std::vector<Query> children;
    SourcePos pos;

    static Query make(QueryKind k, std::string text = {}, SourcePos pos = {}) {
        Query q;
        q.kind = k;
        q.text = std::move(text);
        q.pos = pos;
        return q;
    }
    static Query lit(LiteralKind k, std::string text, SourcePos pos = {}) {
        Query q = make(QueryKind::Literal, std::move(text), pos);
        q.literal = k;
        return q;
    }
    static Query pred(std::string name, bool prefixed = true) {
        Query q = make(QueryKind::Predicate, std::move(name));
        q.prefixed = prefixed;
        return q;
    }
    static Query call(std::string name, std::vector<Query> args) {
        Query q = make(QueryKind::Template, std::move(name));
        q.children = std::move(args);
        return q;
    }
    static Query negate(Query inner) {
        Query q = make(QueryKind::Not);
        q.children.push_back(std::move(inner));
        return q;
    }
    static Query join(QueryKind k, std::vector<Query> parts) {
        Query q = make(k);
        q.children = std::move(parts);
        return q;
    }

    /// Structural equality; positions are ignored.
    friend bool operator==(const Query& a, const Query& b) {
        return a.kind == b.kind && a.text == b.text && a.literal == b.literal && a.prefixed == b.prefixed &&
               a.children == b.children;
    }
};

namespace detail {

inline std::string quote(const std::string& s, bool regex) {
    std::string out = regex ? "~\"" : "\"";
    for (char c : s) {
        if (c == '"' || (!regex && c == '\\')) out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void print(const Query& q, std::string& out);

inline void print_child(const Query& parent, const Query& c, std::string& out) {
    bool paren = false;
    if (c.kind == QueryKind::And || c.kind == QueryKind::Or) {
        if (parent.kind == QueryKind::Not) paren = true;
        else if (parent.kind == c.kind) paren = true;
        else if (parent.kind == QueryKind::And && c.kind == QueryKind::Or) paren = true;
    }
    if (paren) out.push_back('(');
    print(c, out);
    if (paren) out.push_back(')');
}

inline void print(const Query& q, std::string& out) {
    switch (q.kind) {
        case QueryKind::And:
        case QueryKind::Or:
            for (std::size_t i = 0; i < q.children.size(); ++i) {
                if (i) out += q.kind == QueryKind::And ? " and " : " or ";
                print_child(q, q.children[i], out);
            }
            break;
        case QueryKind::Not:
            out += "not ";
            print_child(q, q.children.at(0), out);
            break;
        case QueryKind::Template:
            out += q.text + "<";
            for (std::size_t i = 0; i < q.children.size(); ++i) {
                if (i) out += ", ";
                print(q.children[i], out);
            }
            out += ">";
            break;
        case QueryKind::Predicate:
            out += (q.prefixed ? "PRED:" : "") + q.text;
            break;
        case QueryKind::Literal:
            if (q.literal == LiteralKind::Wildcard) out += "*";
            else out += quote(q.text, q.literal == LiteralKind::Regex);
            break;
    }
}

}  // namespace detail

/// Pretty-printer with the fewest parentheses that reparse to the same tree.
inline std::string to_string(const Query& q) {
    std::string out;
    detail::print(q, out);
    return out;
}

}  // namespace starquery::codesearch
