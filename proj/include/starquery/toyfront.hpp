#pragma once

// A small JavaScript-like language and its analysis-graph builder.
//
//   let f = file();  f.close();  f.read();
//   function func(param, mode = "r") { param.close(); return mode; }

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "common.hpp"
#include "factstore.hpp"
#include "log.hpp"

namespace starquery::toy {

struct Expr {
    enum Kind { Ident, String, Number, Bool, Member, Call };
    Kind kind = Ident;
    std::string text;              // identifier, literal text or member name
    std::vector<Expr> children;    // Member: {object}; Call: {callee, args...}
    SourcePos pos;
    bool resolved = false;         // identifiers only

    const Expr& callee() const { return children.front(); }
    std::size_t arg_count() const { return children.size() - 1; }
    const Expr& arg(std::size_t i) const { return children[i + 1]; }
};

struct Param {
    std::string name;
    std::optional<Expr> default_value;
    SourcePos pos;
};

struct Stmt {
    enum Kind { Let, ExprStmt, Function, Return };
    Kind kind = ExprStmt;
    std::string name;           // Let / Function
    std::optional<Expr> expr;   // Let init, expression, return value
    std::vector<Param> params;  // Function
    std::vector<Stmt> body;     // Function
    SourcePos pos;
};

struct Ast {
    std::string filename;
    std::string source;
    std::vector<Stmt> statements;
    std::vector<std::pair<std::string, SourcePos>> unresolved;
};

namespace detail {

enum class T { Ident, String, Number, Punct, End };

struct Tok {
    T kind;
    std::string text;
    SourcePos pos;
};

inline std::vector<Tok> lex(std::string_view src) {
    std::vector<Tok> out;
    Cursor cur(src);
    while (true) {
        while (!cur.at_end()) {
            if (std::isspace(static_cast<unsigned char>(cur.peek()))) cur.advance();
            else if (cur.starts_with("//"))
                while (!cur.at_end() && cur.peek() != '\n') cur.advance();
            else break;
        }
        SourcePos start = cur.pos();
        if (cur.at_end()) break;
        char c = cur.peek();
        if (is_ident_start(c) || c == '$') {
            std::string s;
            while (!cur.at_end() && (is_ident_char(cur.peek()) || cur.peek() == '$')) s.push_back(cur.advance());
            out.push_back({T::Ident, s, start});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string s;
            while (!cur.at_end() && (std::isdigit(static_cast<unsigned char>(cur.peek())) || cur.peek() == '.'))
                s.push_back(cur.advance());
            out.push_back({T::Number, s, start});
        } else if (c == '"' || c == '\'') {
            char q = cur.advance();
            std::string s;
            while (true) {
                if (cur.at_end() || cur.peek() == '\n') throw ParseError("unterminated string", start);
                char ch = cur.advance();
                if (ch == q) break;
                if (ch == '\\' && !cur.at_end()) ch = cur.advance();
                s.push_back(ch);
            }
            out.push_back({T::String, s, start});
        } else if (std::string_view("(){},;.=").find(c) != std::string_view::npos) {
            cur.advance();
            out.push_back({T::Punct, std::string(1, c), start});
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", start);
        }
    }
    out.push_back({T::End, "", cur.pos()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    std::vector<Stmt> program() {
        std::vector<Stmt> out;
        while (peek().kind != T::End) out.push_back(statement(false));
        return out;
    }

private:
    std::vector<Tok> toks_;
    std::size_t i_ = 0;

    const Tok& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    const Tok& next() { return toks_[std::min(i_++, toks_.size() - 1)]; }
    bool is_punct(const char* p) const { return peek().kind == T::Punct && peek().text == p; }
    bool is_word(const char* w) const { return peek().kind == T::Ident && peek().text == w; }

    [[noreturn]] void fail(const std::string& what) const {
        const Tok& t = peek();
        std::string found = t.kind == T::End ? "end of file" : "'" + t.text + "'";
        throw ParseError(what + ", found " + found, t.pos);
    }

    void expect(const char* p) {
        if (!is_punct(p)) fail(std::string("expected '") + p + "'");
        next();
    }

    std::string ident(const char* what) {
        if (peek().kind != T::Ident) fail(std::string("expected ") + what);
        return next().text;
    }

    Stmt statement(bool in_function) {
        Stmt s;
        s.pos = peek().pos;
        if (is_word("let")) {
            next();
            s.kind = Stmt::Let;
            s.name = ident("a variable name");
            expect("=");
            s.expr = expression();
            expect(";");
        } else if (is_word("function")) {
            next();
            s.kind = Stmt::Function;
            s.name = ident("a function name");
            expect("(");
            while (!is_punct(")")) {
                Param p;
                p.pos = peek().pos;
                p.name = ident("a parameter name");
                if (is_punct("=")) {
                    next();
                    p.default_value = expression();
                }
                s.params.push_back(std::move(p));
                if (!is_punct(",")) break;
                next();
            }
            expect(")");
            expect("{");
            while (!is_punct("}")) {
                if (peek().kind == T::End) fail("expected '}'");
                s.body.push_back(statement(true));
            }
            next();
            if (is_punct(";")) next();
        } else if (is_word("return")) {
            if (!in_function) fail("'return' outside a function");
            next();
            s.kind = Stmt::Return;
            s.expr = expression();
            expect(";");
        } else {
            s.kind = Stmt::ExprStmt;
            s.expr = expression();
            expect(";");
        }
        return s;
    }

    Expr expression() {
        Expr e = primary();
        while (true) {
            if (is_punct(".")) {
                next();
                Expr m;
                m.kind = Expr::Member;
                m.text = ident("a member name");
                m.pos = e.pos;
                m.children.push_back(std::move(e));
                e = std::move(m);
            } else if (is_punct("(")) {
                next();
                Expr c;
                c.kind = Expr::Call;
                c.pos = e.pos;
                c.children.push_back(std::move(e));
                while (!is_punct(")")) {
                    c.children.push_back(expression());
                    if (!is_punct(",")) break;
                    next();
                }
                expect(")");
                if (c.arg_count() > 7) throw ParseError("calls take at most 7 arguments", c.pos);
                e = std::move(c);
            } else {
                return e;
            }
        }
    }

    Expr primary() {
        const Tok& t = peek();
        Expr e;
        e.pos = t.pos;
        switch (t.kind) {
            case T::Ident:
                if (t.text == "true" || t.text == "false") e.kind = Expr::Bool;
                else if (t.text == "let" || t.text == "function" || t.text == "return") fail("expected an expression");
                else e.kind = Expr::Ident;
                break;
            case T::String: e.kind = Expr::String; break;
            case T::Number: e.kind = Expr::Number; break;
            default:
                if (is_punct("(")) {
                    next();
                    Expr inner = expression();
                    expect(")");
                    return inner;
                }
                fail("expected an expression");
        }
        e.text = t.text;
        next();
        return e;
    }
};

// Marks identifiers that refer to a declaration in scope. Functions are
// hoisted; variables are visible after their `let`.
class Resolver {
public:
    explicit Resolver(Ast& ast) : ast_(ast) {}

    void run() {
        scopes_.emplace_back();
        hoist(ast_.statements);
        for (auto& s : ast_.statements) stmt(s);
    }

private:
    Ast& ast_;
    std::vector<std::set<std::string>> scopes_;

    void hoist(const std::vector<Stmt>& stmts) {
        for (auto& s : stmts)
            if (s.kind == Stmt::Function) scopes_.back().insert(s.name);
    }

    bool visible(const std::string& n) const {
        return std::any_of(scopes_.begin(), scopes_.end(), [&](auto& sc) { return sc.count(n) > 0; });
    }

    void expr(Expr& e) {
        if (e.kind == Expr::Ident) {
            e.resolved = visible(e.text);
            if (!e.resolved) ast_.unresolved.emplace_back(e.text, e.pos);
        }
        for (auto& c : e.children) expr(c);
    }

    void stmt(Stmt& s) {
        switch (s.kind) {
            case Stmt::Let:
                expr(*s.expr);
                scopes_.back().insert(s.name);
                break;
            case Stmt::Function:
                scopes_.emplace_back();
                for (auto& p : s.params) {
                    if (p.default_value) expr(*p.default_value);
                    scopes_.back().insert(p.name);
                }
                hoist(s.body);
                for (auto& b : s.body) stmt(b);
                scopes_.pop_back();
                break;
            default: expr(*s.expr);
        }
    }
};

}  // namespace detail

inline Ast parse_toy(std::string_view source, std::string filename) {
    Ast ast;
    ast.filename = std::move(filename);
    ast.source = std::string(source);
    ast.statements = detail::Parser(source).program();
    detail::Resolver(ast).run();
    return ast;
}

inline Ast parse_toy_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_toy(ss.str(), path);
}

struct SpanEntry {
    NodeId node;
    std::string file;
    std::size_t line = 0, col = 0;
    std::size_t offset = 0;
};

struct GraphBuildOutput {
    Database database;
    std::vector<SpanEntry> remap;  // one entry per source-positioned node, in node order
    std::vector<std::string> warnings;
};

namespace detail {

class GraphBuilder {
public:
    GraphBuildOutput run(const std::vector<Ast>& asts) {
        for (const char* rel : {"dataflow", "same_object", "in_file", "returns", "returned_by", "param_self"})
            edges_[rel];
        for (int i = 0; i < 8; ++i) edges_["arg" + std::to_string(i)];
        for (int i = 1; i < 8; ++i) edges_["param" + std::to_string(i)];

        for (auto& ast : asts) {
            file_ = &ast.filename;
            file_node_ = node(NodeKind::File, ast.filename, {1, 1, 0});
            scopes_.assign(1, {});
            declare_functions(ast.statements);
            fn_stack_.clear();
            for (auto& s : ast.statements) stmt(s);
        }
        link_calls();
        alias_pairs();

        GraphBuildOutput out;
        for (auto& rel : edge_vocabulary()) b_.declare_binary(rel);
        for (auto& [rel, pairs] : edges_) {
            b_.declare_binary(rel);
            for (auto& [x, y] : pairs) b_.add_edge(rel, x, y);
        }
        out.remap = std::move(remap_);
        out.warnings = std::move(warnings_);
        out.database = std::move(b_).build();
        return out;
    }

private:
    struct Var {
        NodeId def;
        std::vector<NodeId> uses;
    };
    struct Fn {
        NodeId decl;
        std::vector<std::size_t> params;  // Var indices
        std::vector<NodeId> returns;
    };
    struct CallSite {
        NodeId call;
        std::string callee;
        std::vector<NodeId> args;
        std::vector<std::optional<std::size_t>> arg_vars;  // actual is a plain variable use
        std::string file;
        SourcePos pos;
    };

    DatabaseBuilder b_;
    std::map<std::string, std::set<std::pair<NodeId, NodeId>>> edges_;
    std::vector<SpanEntry> remap_;
    std::vector<std::string> warnings_;
    const std::string* file_ = nullptr;
    NodeId file_node_ = 0;
    std::vector<Var> vars_;
    std::vector<std::map<std::string, std::size_t>> scopes_;
    std::map<std::string, Fn> functions_;
    std::map<NodeId, std::size_t> fn_of_decl_;
    std::vector<Fn*> fn_stack_;
    std::map<const Stmt*, NodeId> decl_of_;
    std::vector<CallSite> calls_;
    std::vector<std::pair<NodeId, NodeId>> aliases_;

    NodeId node(NodeKind kind, const std::string& name, SourcePos pos) {
        NodeId id = b_.add_node(kind, {{"name", name},
                                       {"file", *file_},
                                       {"line", std::to_string(pos.line)},
                                       {"col", std::to_string(pos.col)}});
        remap_.push_back({id, *file_, pos.line, pos.col, pos.offset});
        if (kind != NodeKind::File) edge("in_file", id, file_node_);
        return id;
    }

    void edge(const std::string& rel, NodeId a, NodeId b) { edges_[rel].emplace(a, b); }

    std::optional<std::size_t> lookup(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
            if (auto f = it->find(name); f != it->end()) return f->second;
        return std::nullopt;
    }

    std::size_t declare(const std::string& name, NodeId def) {
        vars_.push_back({def, {}});
        scopes_.back()[name] = vars_.size() - 1;
        return vars_.size() - 1;
    }

    void declare_functions(const std::vector<Stmt>& stmts) {
        for (auto& s : stmts) {
            if (s.kind != Stmt::Function) continue;
            NodeId decl = node(NodeKind::FunctionDecl, s.name, s.pos);
            decl_of_[&s] = decl;
            if (functions_.count(s.name)) {
                warnings_.push_back(*file_ + ":" + to_string(s.pos) + ": function '" + s.name +
                                    "' is already declared; calls resolve to the first declaration");
                continue;
            }
            functions_[s.name].decl = decl;
        }
    }

    // Emits the node for an expression and returns it.
    NodeId expr(const Expr& e) {
        switch (e.kind) {
            case Expr::String: return node(NodeKind::StringLiteral, e.text, e.pos);
            case Expr::Number: return node(NodeKind::NumberLiteral, e.text, e.pos);
            case Expr::Bool: return node(NodeKind::BooleanLiteral, e.text, e.pos);
            case Expr::Ident: {
                NodeId id = node(NodeKind::Identifier, e.text, e.pos);
                if (auto v = lookup(e.text)) {
                    Var& var = vars_[*v];
                    edge("dataflow", var.def, id);
                    if (!var.uses.empty()) edge("dataflow", var.uses.back(), id);
                    var.uses.push_back(id);
                    aliases_.emplace_back(var.def, id);
                }
                return id;
            }
            case Expr::Member: {
                NodeId obj = expr(e.children[0]);
                NodeId id = node(NodeKind::Other, e.text, e.pos);
                edge("dataflow", obj, id);
                return id;
            }
            case Expr::Call: {
                const Expr& callee = e.callee();
                std::optional<NodeId> receiver;
                std::string name;
                if (callee.kind == Expr::Member) {
                    receiver = expr(callee.children[0]);
                    name = callee.text;
                } else if (callee.kind == Expr::Ident) {
                    name = callee.text;
                } else {
                    receiver = expr(callee);
                    name = "<expr>";
                }
                NodeId call = node(NodeKind::CallExpression, name, e.pos);
                if (receiver) edge("arg0", call, *receiver);
                CallSite site{call, callee.kind == Expr::Ident ? name : std::string(), {}, {}, *file_, e.pos};
                for (std::size_t i = 0; i < e.arg_count(); ++i) {
                    const Expr& a = e.arg(i);
                    NodeId an = expr(a);
                    edge("arg" + std::to_string(i + 1), call, an);
                    site.args.push_back(an);
                    std::optional<std::size_t> var;
                    if (a.kind == Expr::Ident) var = lookup(a.text);
                    site.arg_vars.push_back(var);
                }
                calls_.push_back(std::move(site));
                return call;
            }
        }
        return 0;
    }

    void stmt(const Stmt& s) {
        switch (s.kind) {
            case Stmt::Let: {
                NodeId init = expr(*s.expr);
                NodeId decl = node(NodeKind::Identifier, s.name, s.pos);
                edge("dataflow", init, decl);
                aliases_.emplace_back(init, decl);
                declare(s.name, decl);
                break;
            }
            case Stmt::ExprStmt: expr(*s.expr); break;
            case Stmt::Return: {
                NodeId v = expr(*s.expr);
                if (!fn_stack_.empty()) {
                    Fn& fn = *fn_stack_.back();
                    edge("returns", fn.decl, v);
                    edge("returned_by", v, fn.decl);
                    fn.returns.push_back(v);
                }
                break;
            }
            case Stmt::Function: {
                NodeId decl = decl_of_.at(&s);
                Fn scratch{decl, {}, {}};
                Fn& fn = functions_.at(s.name).decl == decl ? functions_.at(s.name) : scratch;
                scopes_.emplace_back();
                for (std::size_t i = 0; i < s.params.size(); ++i) {
                    const Param& p = s.params[i];
                    NodeId pn = node(NodeKind::Parameter, p.name, p.pos);
                    if (i < 7) edge("param" + std::to_string(i + 1), decl, pn);
                    if (p.default_value) {
                        // Defaults are evaluated once, into the function object.
                        NodeId dv = expr(*p.default_value);
                        edge("dataflow", dv, pn);
                        edge("dataflow", dv, decl);
                    }
                    fn.params.push_back(declare(p.name, pn));
                }
                fn_stack_.push_back(&fn);
                declare_functions(s.body);
                for (auto& b : s.body) stmt(b);
                fn_stack_.pop_back();
                scopes_.pop_back();
                break;
            }
        }
    }

    // Interprocedural edges: actual to formal, formal's last use back to the
    // caller's next use of the same variable, and return values to the call.
    void link_calls() {
        for (auto& c : calls_) {
            if (c.callee.empty()) continue;
            auto it = functions_.find(c.callee);
            if (it == functions_.end()) {
                warnings_.push_back(c.file + ":" + to_string(c.pos) + ": unresolved callee '" + c.callee + "'");
                continue;
            }
            const Fn& fn = it->second;
            for (std::size_t i = 0; i < c.args.size() && i < fn.params.size(); ++i) {
                const Var& formal = vars_[fn.params[i]];
                edge("dataflow", c.args[i], formal.def);
                aliases_.emplace_back(c.args[i], formal.def);
                if (!c.arg_vars[i] || formal.uses.empty()) continue;
                const Var& actual = vars_[*c.arg_vars[i]];
                auto u = std::find(actual.uses.begin(), actual.uses.end(), c.args[i]);
                if (u != actual.uses.end() && std::next(u) != actual.uses.end())
                    edge("dataflow", formal.uses.back(), *std::next(u));
            }
            for (NodeId r : fn.returns) edge("dataflow", r, c.call);
        }
    }

    // same_object: reflexive-symmetric closure of the recorded must-alias pairs.
    void alias_pairs() {
        std::vector<NodeId> parent(b_.size());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](NodeId x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (auto& [a, b] : aliases_) parent[find(a)] = find(b);
        std::map<NodeId, std::vector<NodeId>> classes;
        for (NodeId x = 0; x < parent.size(); ++x)
            if (b_.node(x).kind != NodeKind::File) classes[find(x)].push_back(x);
        for (auto& [root, members] : classes)
            for (NodeId x : members)
                for (NodeId y : members) edge("same_object", x, y);
    }
};

}  // namespace detail

/// Builds one analysis graph over all given files.
inline GraphBuildOutput build_graph(const std::vector<Ast>& asts) {
    auto out = detail::GraphBuilder().run(asts);
    for (auto& w : out.warnings) logger().info("{}", w);
    return out;
}

}  // namespace starquery::toy
