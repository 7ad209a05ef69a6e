#pragma once

// Concrete syntax:
//
//   head(X) :- cit, !cit, edge(X, Y), Tmpl(p, Other(q))(Y) .
//   template Name(h1, h2) -> result { rules... }
//   .literal sym attr "text".   .literal sym attr ~"regex".
//   .kind sym CallExpression.
//   .query sym.

#include <sstream>
#include <string>
#include <string_view>

#include "ast.hpp"
#include "lexer.hpp"

namespace starquery::starlang {

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : ts_(tokenize(text)) {}

    Program parse_program() {
        Program prog;
        while (!ts_.at(Tok::End)) {
            if (ts_.at(Tok::Dot) && ts_.at(Tok::Ident, 1)) {
                parse_directive(prog);
            } else if (ts_.at(Tok::Ident) && ts_.peek().text == "template" && ts_.at(Tok::Ident, 1)) {
                auto def = parse_template();
                if (prog.templates.count(def.name))
                    throw ParseError("duplicate template '" + def.name + "'", def.pos);
                prog.templates.emplace(def.name, std::move(def));
            } else {
                prog.rules.push_back(parse_rule());
            }
        }
        return prog;
    }

    Rule parse_single_rule() {
        Rule r = parse_rule();
        ts_.expect(Tok::End, "after rule");
        return r;
    }

private:
    void parse_directive(Program& prog) {
        ts_.next();  // '.'
        const Token& kw = ts_.next();
        if (kw.text == "query") {
            prog.query = ts_.expect(Tok::Ident, "after .query").text;
        } else if (kw.text == "literal") {
            std::string sym = ts_.expect(Tok::Ident, "after .literal").text;
            std::string attr = ts_.expect(Tok::Ident, "(attribute name)").text;
            LiteralBinding b{attr, {}};
            if (ts_.at(Tok::String)) b.matcher = LiteralMatcher::exact(ts_.next().text);
            else if (ts_.at(Tok::Regex)) b.matcher = LiteralMatcher::regex(ts_.next().text);
            else throw ParseError("expected string or ~\"regex\" in .literal", ts_.peek().pos);
            prog.literals[sym] = std::move(b);
        } else if (kw.text == "kind") {
            std::string sym = ts_.expect(Tok::Ident, "after .kind").text;
            const Token& k = ts_.expect(Tok::Ident, "(node kind)");
            auto kind = parse_kind(k.text);
            if (!kind) throw ParseError("unknown node kind '" + k.text + "'", k.pos);
            prog.kinds[sym] = *kind;
        } else {
            throw ParseError("unknown directive '." + kw.text + "'", kw.pos);
        }
        ts_.expect(Tok::Dot, "to end directive");
    }

    TemplateDef parse_template() {
        TemplateDef def;
        def.pos = ts_.next().pos;  // 'template'
        def.name = ts_.expect(Tok::Ident, "(template name)").text;
        ts_.expect(Tok::LParen, "after template name");
        if (!ts_.at(Tok::RParen)) {
            do def.holes.push_back(ts_.expect(Tok::Ident, "(hole name)").text);
            while (ts_.accept(Tok::Comma));
        }
        ts_.expect(Tok::RParen, "after template holes");
        if (ts_.accept(Tok::Arrow)) def.result = ts_.expect(Tok::Ident, "(result predicate)").text;
        ts_.expect(Tok::LBrace, "to open template body");
        while (!ts_.at(Tok::RBrace)) {
            if (ts_.at(Tok::End)) throw ParseError("unterminated template body", def.pos);
            def.body.push_back(parse_rule());
        }
        ts_.next();
        if (def.body.empty()) throw ParseError("template '" + def.name + "' has no rules", def.pos);
        if (def.result.empty()) def.result = def.body.front().head;
        return def;
    }

    Rule parse_rule() {
        Rule r;
        const Token& head = ts_.expect(Tok::Ident, "(rule head)");
        r.head = head.text;
        r.pos = head.pos;
        ts_.expect(Tok::LParen, "after rule head");
        r.head_var = ts_.expect(Tok::Ident, "(head variable)").text;
        if (ts_.at(Tok::Comma))
            throw ParseError("non-monadic head: rule heads must have exactly one variable", ts_.peek().pos);
        ts_.expect(Tok::RParen, "after head variable");
        ts_.expect(Tok::Implies, "after rule head");
        if (!ts_.at(Tok::Dot)) {
            do r.body.push_back(parse_citation());
            while (ts_.accept(Tok::Comma));
        }
        ts_.expect(Tok::Dot, "to end rule");
        return r;
    }

    TemplateCall parse_call_arg() {
        TemplateCall c = TemplateCall::symbol(ts_.expect(Tok::Ident, "(template argument)").text);
        if (ts_.accept(Tok::LParen)) {
            c.is_call = true;
            if (!ts_.at(Tok::RParen)) {
                do c.args.push_back(parse_call_arg());
                while (ts_.accept(Tok::Comma));
            }
            ts_.expect(Tok::RParen, "after template arguments");
        }
        return c;
    }

    Citation parse_citation() {
        Citation c;
        c.pos = ts_.peek().pos;
        c.negated = ts_.accept(Tok::Bang);
        const Token& name = ts_.expect(Tok::Ident, "(predicate)");
        ts_.expect(Tok::LParen, "after predicate");
        std::vector<TemplateCall> items;
        if (!ts_.at(Tok::RParen)) {
            do items.push_back(parse_call_arg());
            while (ts_.accept(Tok::Comma));
        }
        ts_.expect(Tok::RParen, "after arguments");
        if (ts_.accept(Tok::LParen)) {
            // Template invocation: Name(args)(Var)
            c.call = TemplateCall{name.text, std::move(items), true};
            c.vars.push_back(ts_.expect(Tok::Ident, "(variable)").text);
            if (ts_.at(Tok::Comma))
                throw ParseError("template invocations denote unary predicates", ts_.peek().pos);
            ts_.expect(Tok::RParen, "after variable");
            return c;
        }
        c.predicate = name.text;
        for (auto& it : items) {
            if (it.is_call) throw ParseError("variables cannot be template invocations", c.pos);
            c.vars.push_back(it.name);
        }
        if (c.vars.empty()) throw ParseError("citation of '" + c.predicate + "' has no variables", name.pos);
        if (c.vars.size() > 2)
            throw ParseError("n-ary predicates with n > 2 are not supported ('" + c.predicate + "')", name.pos);
        if (c.negated && c.vars.size() == 2)
            throw ParseError("negated binary citations are not supported ('" + c.predicate + "')", c.pos);
        return c;
    }

    TokenStream ts_;
};

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace detail

/// Parses StarLang text. Performs syntax checks only; see validate.hpp.
inline Program parse_starlang(std::string_view text) { return detail::Parser(text).parse_program(); }

inline Rule parse_rule(std::string_view text) { return detail::Parser(text).parse_single_rule(); }

// --- printing ---------------------------------------------------------------

inline std::string to_string(const TemplateCall& c) {
    if (!c.is_call) return c.name;
    std::string s = c.name + "(";
    for (std::size_t i = 0; i < c.args.size(); ++i) s += (i ? ", " : "") + to_string(c.args[i]);
    return s + ")";
}

inline std::string to_string(const Citation& c) {
    std::string s = c.negated ? "!" : "";
    s += c.call ? to_string(*c.call) : c.predicate;
    s += "(";
    for (std::size_t i = 0; i < c.vars.size(); ++i) s += (i ? ", " : "") + c.vars[i];
    return s + ")";
}

inline std::string to_string(const Rule& r) {
    std::string s = r.head + "(" + r.head_var + ") :-";
    for (std::size_t i = 0; i < r.body.size(); ++i) s += (i ? ", " : " ") + to_string(r.body[i]);
    return s + ".";
}

/// Canonical text; parse_starlang(to_string(p)) == p.
inline std::string to_string(const Program& p) {
    std::ostringstream os;
    for (auto& [sym, kind] : p.kinds) os << ".kind " << sym << " " << kind_name(kind) << ".\n";
    for (auto& [sym, b] : p.literals)
        os << ".literal " << sym << " " << b.attribute << " "
           << (b.matcher.kind == LiteralMatcher::Kind::Regex ? "~" : "") << detail::quote(b.matcher.text) << ".\n";
    for (auto& [name, t] : p.templates) {
        os << "template " << name << "(";
        for (std::size_t i = 0; i < t.holes.size(); ++i) os << (i ? ", " : "") << t.holes[i];
        os << ") -> " << t.result << " {\n";
        for (auto& r : t.body) os << "  " << to_string(r) << "\n";
        os << "}\n";
    }
    for (auto& r : p.rules) os << to_string(r) << "\n";
    if (!p.query.empty()) os << ".query " << p.query << ".\n";
    return os.str();
}

}  // namespace starquery::starlang
