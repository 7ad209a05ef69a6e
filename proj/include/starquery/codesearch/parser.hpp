#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "../common.hpp"
#include "../regex.hpp"
#include "ast.hpp"
#include "stdlib.hpp"

namespace starquery::codesearch {

enum class CTok { Word, String, Regex, Star, Pred, Lt, Gt, Comma, LParen, RParen, And, Or, Not, End };

struct CToken {
    CTok kind = CTok::End;
    std::string text;
    SourcePos pos;
    std::size_t end = 0;  // byte offset one past the token
    bool open = false;    // unterminated string (tolerant mode only)
};

inline std::string_view describe(CTok k) {
    switch (k) {
        case CTok::Word: return "name";
        case CTok::String: return "string literal";
        case CTok::Regex: return "regex literal";
        case CTok::Star: return "'*'";
        case CTok::Pred: return "PRED: citation";
        case CTok::Lt: return "'<'";
        case CTok::Gt: return "'>'";
        case CTok::Comma: return "','";
        case CTok::LParen: return "'('";
        case CTok::RParen: return "')'";
        case CTok::And: return "'and'";
        case CTok::Or: return "'or'";
        case CTok::Not: return "'not'";
        case CTok::End: return "end of query";
    }
    return "?";
}

inline bool is_word_char(char c) { return is_ident_char(c) || c == '.' || c == '$'; }

/// Splits query text into tokens. In tolerant mode an unterminated string
/// or stray character ends the stream instead of throwing.
inline std::vector<CToken> tokenize_codesearch(std::string_view text, bool tolerant = false) {
    std::vector<CToken> out;
    Cursor cur(text);
    auto finish = [&](CToken t) {
        t.end = cur.pos().offset;
        out.push_back(std::move(t));
    };
    while (true) {
        while (!cur.at_end() && std::isspace(static_cast<unsigned char>(cur.peek()))) cur.advance();
        SourcePos start = cur.pos();
        if (cur.at_end()) break;
        char c = cur.peek();
        if (c == '"' || (c == '~' && cur.peek(1) == '"')) {
            bool regex = c == '~';
            cur.advance();
            if (regex) cur.advance();
            CToken t{regex ? CTok::Regex : CTok::String, {}, start};
            bool closed = false;
            while (!cur.at_end()) {
                char ch = cur.advance();
                if (ch == '"') {
                    closed = true;
                    break;
                }
                if (ch == '\\' && !cur.at_end()) {
                    char e = cur.advance();
                    if (regex && e != '"') t.text.push_back('\\');
                    t.text.push_back(e);
                } else {
                    t.text.push_back(ch);
                }
            }
            if (!closed) {
                if (!tolerant) throw ParseError("unterminated string literal", start);
                t.open = true;
                finish(std::move(t));
                break;
            }
            finish(std::move(t));
            continue;
        }
        if (is_ident_start(c) || c == '$') {
            std::string w;
            while (!cur.at_end() && is_word_char(cur.peek())) w.push_back(cur.advance());
            if (w == "PRED" && cur.peek() == ':') {
                cur.advance();
                std::string name;
                while (!cur.at_end() && is_ident_char(cur.peek())) name.push_back(cur.advance());
                if (name.empty() && !tolerant) throw ParseError("expected a predicate name after 'PRED:'", cur.pos());
                finish({CTok::Pred, name, start});
                continue;
            }
            CTok k = w == "and" ? CTok::And : w == "or" ? CTok::Or : w == "not" ? CTok::Not : CTok::Word;
            finish({k, w, start});
            continue;
        }
        CTok k;
        switch (c) {
            case '*': k = CTok::Star; break;
            case '<': k = CTok::Lt; break;
            case '>': k = CTok::Gt; break;
            case ',': k = CTok::Comma; break;
            case '(': k = CTok::LParen; break;
            case ')': k = CTok::RParen; break;
            default:
                if (tolerant) return out;
                throw ParseError(std::string("unexpected character '") + c + "'", start);
        }
        cur.advance();
        finish({k, std::string(1, c), start});
    }
    CToken end{CTok::End, {}, cur.pos()};
    end.end = cur.pos().offset;
    out.push_back(end);
    return out;
}

namespace detail {

class QueryParser {
public:
    QueryParser(std::string_view text, const PredicateConfig* config)
        : toks_(tokenize_codesearch(text)), config_(config) {}

    Query parse() {
        if (peek().kind == CTok::End) throw ParseError("empty query", peek().pos);
        Query q = parse_or();
        if (peek().kind != CTok::End)
            throw ParseError("expected 'and', 'or' or end of query, found " + found(peek()), peek().pos);
        return q;
    }

private:
    std::vector<CToken> toks_;
    std::size_t i_ = 0;
    const PredicateConfig* config_;

    const CToken& peek() const { return toks_[i_]; }
    const CToken& next() { return toks_[i_++]; }

    static std::string found(const CToken& t) {
        if (t.kind == CTok::Word) return "'" + t.text + "'";
        return std::string(describe(t.kind));
    }

    Query parse_or() {
        SourcePos pos = peek().pos;
        std::vector<Query> parts{parse_and()};
        while (peek().kind == CTok::Or) {
            next();
            parts.push_back(parse_and());
        }
        if (parts.size() == 1) return std::move(parts[0]);
        Query q = Query::join(QueryKind::Or, std::move(parts));
        q.pos = pos;
        return q;
    }

    Query parse_and() {
        SourcePos pos = peek().pos;
        std::vector<Query> parts{parse_unary()};
        while (peek().kind == CTok::And) {
            next();
            parts.push_back(parse_unary());
        }
        if (parts.size() == 1) return std::move(parts[0]);
        Query q = Query::join(QueryKind::And, std::move(parts));
        q.pos = pos;
        return q;
    }

    Query parse_unary() {
        if (peek().kind == CTok::Not) {
            SourcePos pos = next().pos;
            Query q = Query::negate(parse_unary());
            q.pos = pos;
            return q;
        }
        return parse_primary();
    }

    bool known_predicate(const std::string& name) const {
        if (auto* e = lookup(name)) return !e->is_template();
        return config_ && config_->binds(name);
    }

    Query parse_primary() {
        const CToken& t = next();
        switch (t.kind) {
            case CTok::LParen: {
                Query q = parse_or();
                if (peek().kind != CTok::RParen) throw ParseError("expected ')', found " + found(peek()), peek().pos);
                next();
                return q;
            }
            case CTok::String: return Query::lit(LiteralKind::Exact, t.text, t.pos);
            case CTok::Regex: {
                try {
                    re::Regex::compile(t.text);
                } catch (const ParseError& e) {
                    throw ParseError(e.message(),
                                     {t.pos.line, t.pos.col + 2 + e.pos().col - 1, t.pos.offset + 2 + e.pos().offset});
                }
                return Query::lit(LiteralKind::Regex, t.text, t.pos);
            }
            case CTok::Star: return Query::lit(LiteralKind::Wildcard, "*", t.pos);
            case CTok::Pred: {
                if (!known_predicate(t.text)) {
                    auto* e = lookup(t.text);
                    throw ParseError(e ? "'" + t.text + "' is a template, not a predicate"
                                       : "unknown predicate '" + t.text + "'",
                                     t.pos);
                }
                Query q = Query::pred(t.text);
                q.pos = t.pos;
                return q;
            }
            case CTok::Word: return parse_word(t);
            default: throw ParseError("expected a citation, found " + found(t), t.pos);
        }
    }

    Query parse_word(const CToken& t) {
        const StdlibEntry* e = lookup(t.text);
        if (peek().kind == CTok::Lt) {
            if (!e) throw ParseError("unknown template '" + t.text + "'", t.pos);
            if (!e->is_template()) throw ParseError("'" + t.text + "' is a predicate and takes no arguments", t.pos);
            next();
            Query q = Query::make(QueryKind::Template, t.text, t.pos);
            q.children.push_back(parse_or());
            while (peek().kind == CTok::Comma) {
                next();
                q.children.push_back(parse_or());
            }
            if (peek().kind != CTok::Gt)
                throw ParseError("expected ',' or '>' in arguments of '" + t.text + "', found " + found(peek()),
                                 peek().pos);
            next();
            if (q.children.size() != e->arity())
                throw ParseError("template '" + t.text + "' expects " + std::to_string(e->arity()) +
                                     " argument(s), got " + std::to_string(q.children.size()),
                                 t.pos);
            return q;
        }
        if (e && e->is_template()) throw ParseError("template '" + t.text + "' needs arguments", t.pos);
        if (known_predicate(t.text)) {
            Query q = Query::pred(t.text, false);
            q.pos = t.pos;
            return q;
        }
        return Query::lit(LiteralKind::Exact, t.text, t.pos);
    }
};

}  // namespace detail

/// Parses a Codesearch query. Names are resolved against the standard
/// library and, when given, the predicate configuration.
inline Query parse_codesearch(std::string_view text, const PredicateConfig* config = nullptr) {
    return detail::QueryParser(text, config).parse();
}

}  // namespace starquery::codesearch
