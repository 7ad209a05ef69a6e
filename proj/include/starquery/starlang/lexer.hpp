#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "../common.hpp"

namespace starquery::starlang {

enum class Tok { Ident, String, Regex, LParen, RParen, LBrace, RBrace, Comma, Dot, Implies, Bang, Arrow, End };

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

inline const char* describe(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::String: return "string";
        case Tok::Regex: return "regex literal";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::Implies: return "':-'";
        case Tok::Bang: return "'!'";
        case Tok::Arrow: return "'->'";
        case Tok::End: return "end of input";
    }
    return "?";
}

/// Tokenizes StarLang / general Datalog text. `%` and `//` start line comments;
/// `¬` is accepted as a synonym for `!`.
inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    Cursor cur(text);
    // Regex bodies keep their escapes verbatim except for \".
    auto read_string = [&](SourcePos start, bool raw) {
        std::string s;
        cur.advance();  // opening quote
        while (true) {
            if (cur.at_end() || cur.peek() == '\n') throw ParseError("unterminated string", start);
            char c = cur.advance();
            if (c == '"') break;
            if (c == '\\') {
                if (cur.at_end()) throw ParseError("unterminated string", start);
                char e = cur.advance();
                if (raw) {
                    if (e != '"') s.push_back('\\');
                    s.push_back(e);
                } else {
                    s.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
                }
            } else {
                s.push_back(c);
            }
        }
        return s;
    };
    while (true) {
        while (!cur.at_end()) {
            char c = cur.peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                cur.advance();
            } else if (c == '%' || (c == '/' && cur.peek(1) == '/')) {
                while (!cur.at_end() && cur.peek() != '\n') cur.advance();
            } else {
                break;
            }
        }
        SourcePos start = cur.pos();
        if (cur.at_end()) {
            out.push_back({Tok::End, "", start});
            return out;
        }
        char c = cur.peek();
        if (is_ident_start(c)) {
            std::string s;
            while (!cur.at_end() && is_ident_char(cur.peek())) s.push_back(cur.advance());
            out.push_back({Tok::Ident, s, start});
        } else if (c == '"') {
            out.push_back({Tok::String, read_string(start, false), start});
        } else if (c == '~' && cur.peek(1) == '"') {
            cur.advance();
            out.push_back({Tok::Regex, read_string(start, true), start});
        } else if (cur.starts_with(":-")) {
            cur.advance();
            cur.advance();
            out.push_back({Tok::Implies, ":-", start});
        } else if (cur.starts_with("->")) {
            cur.advance();
            cur.advance();
            out.push_back({Tok::Arrow, "->", start});
        } else if (cur.starts_with("\xC2\xAC")) {  // ¬
            cur.advance();
            cur.advance();
            out.push_back({Tok::Bang, "!", start});
        } else {
            Tok kind;
            switch (c) {
                case '(': kind = Tok::LParen; break;
                case ')': kind = Tok::RParen; break;
                case '{': kind = Tok::LBrace; break;
                case '}': kind = Tok::RBrace; break;
                case ',': kind = Tok::Comma; break;
                case '.': kind = Tok::Dot; break;
                case '!': kind = Tok::Bang; break;
                default: throw ParseError(std::string("unexpected character '") + c + "'", start);
            }
            cur.advance();
            out.push_back({kind, std::string(1, c), start});
        }
    }
}

/// Token cursor with expectation helpers.
class TokenStream {
public:
    explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(i_ + ahead, toks_.size() - 1)];
    }
    bool at(Tok k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
    const Token& next() {
        const Token& t = toks_[i_];
        if (i_ + 1 < toks_.size()) ++i_;
        return t;
    }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    const Token& expect(Tok k, const char* context) {
        if (!at(k))
            throw ParseError(std::string("expected ") + describe(k) + " " + context + ", found " +
                                 describe(peek().kind) + (peek().text.empty() ? "" : " '" + peek().text + "'"),
                             peek().pos);
        return next();
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

}  // namespace starquery::starlang
