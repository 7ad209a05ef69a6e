#pragma once

// Linear-time regular expressions (RE2-compatible subset).
//
// Patterns compile to a Thompson NFA that is simulated Pike-VM style, so
// matching is O(|pattern| * |text|) with no backtracking. Constructs that need
// backtracking (backreferences, lookaround) are rejected at compile time.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "common.hpp"

namespace starquery::re {

namespace detail {

// Decodes UTF-8 leniently: invalid bytes map to themselves.
inline std::vector<char32_t> decode_utf8(std::string_view s, std::vector<std::size_t>* offsets = nullptr) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        auto b = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        char32_t cp = b;
        if (b >= 0xF0 && b < 0xF8) {
            len = 4;
            cp = b & 0x07;
        } else if (b >= 0xE0) {
            len = 3;
            cp = b & 0x0F;
        } else if (b >= 0xC0) {
            len = 2;
            cp = b & 0x1F;
        }
        if (len > 1) {
            bool ok = i + len <= s.size();
            for (std::size_t k = 1; ok && k < len; ++k) {
                auto c = static_cast<unsigned char>(s[i + k]);
                if ((c & 0xC0) != 0x80) ok = false;
                else cp = (cp << 6) | (c & 0x3F);
            }
            if (!ok) {
                len = 1;
                cp = b;
            }
        }
        if (offsets) offsets->push_back(i);
        out.push_back(cp);
        i += len;
    }
    if (offsets) offsets->push_back(s.size());
    return out;
}

struct CharClass {
    std::vector<std::pair<char32_t, char32_t>> ranges;
    bool negated = false;

    bool matches(char32_t c) const {
        bool in = std::any_of(ranges.begin(), ranges.end(),
                              [c](const auto& r) { return c >= r.first && c <= r.second; });
        return in != negated;
    }
};

inline bool is_word(char32_t c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

struct Node {
    enum class Type { Empty, Literal, Class, AnyChar, BeginText, EndText, WordBoundary, NotWordBoundary, Concat, Alternate, Repeat };
    Type type = Type::Empty;
    char32_t ch = 0;
    CharClass cls;
    std::vector<std::unique_ptr<Node>> children;
    int min = 0;
    int max = -1;  // -1: unbounded
};

constexpr int kMaxRepeat = 1000;

class PatternParser {
public:
    explicit PatternParser(std::string_view pattern) : pattern_(pattern) {
        cps_ = decode_utf8(pattern, &offsets_);
    }

    std::unique_ptr<Node> parse() {
        auto node = parse_alternate();
        if (pos_ < cps_.size()) fail("unmatched ')'", pos_);
        return node;
    }

private:
    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        SourcePos p;
        p.offset = offsets_[std::min(at, offsets_.size() - 1)];
        p.col = at + 1;
        throw ParseError("invalid regex: " + what, p);
    }

    bool more() const { return pos_ < cps_.size(); }
    char32_t peek() const { return cps_[pos_]; }

    std::unique_ptr<Node> parse_alternate() {
        auto first = parse_concat();
        if (!more() || peek() != '|') return first;
        auto alt = std::make_unique<Node>();
        alt->type = Node::Type::Alternate;
        alt->children.push_back(std::move(first));
        while (more() && peek() == '|') {
            ++pos_;
            alt->children.push_back(parse_concat());
        }
        return alt;
    }

    std::unique_ptr<Node> parse_concat() {
        auto cat = std::make_unique<Node>();
        cat->type = Node::Type::Concat;
        while (more() && peek() != '|' && peek() != ')') cat->children.push_back(parse_repeat());
        if (cat->children.size() == 1) return std::move(cat->children.front());
        if (cat->children.empty()) cat->type = Node::Type::Empty;
        return cat;
    }

    bool parse_int(int& out) {
        std::size_t start = pos_;
        long long v = 0;
        while (more() && peek() >= '0' && peek() <= '9') {
            v = v * 10 + (peek() - '0');
            if (v > 100000) v = 100000;
            ++pos_;
        }
        out = static_cast<int>(v);
        return pos_ > start;
    }

    // Parses `{m}`, `{m,}` or `{m,n}`; on anything else restores the position
    // and returns false so the brace is read as a literal (RE2 behaviour).
    bool parse_braces(int& lo, int& hi) {
        std::size_t save = pos_;
        ++pos_;
        if (!parse_int(lo)) {
            pos_ = save;
            return false;
        }
        hi = lo;
        if (more() && peek() == ',') {
            ++pos_;
            if (!parse_int(hi)) hi = -1;
        }
        if (!more() || peek() != '}') {
            pos_ = save;
            return false;
        }
        ++pos_;
        if (lo > kMaxRepeat || hi > kMaxRepeat || (hi != -1 && hi < lo)) fail("bad repetition range", save);
        return true;
    }

    std::unique_ptr<Node> parse_repeat() {
        std::size_t atom_pos = pos_;
        auto atom = parse_atom();
        bool repeated = false;
        while (more()) {
            int lo = 0, hi = -1;
            char32_t c = peek();
            std::size_t op_pos = pos_;
            if (c == '*') {
                ++pos_;
            } else if (c == '+') {
                lo = 1;
                ++pos_;
            } else if (c == '?') {
                hi = 1;
                ++pos_;
            } else if (c == '{') {
                if (!parse_braces(lo, hi)) break;
            } else {
                break;
            }
            if (repeated) fail("bad repetition operator", op_pos);
            if (atom->type == Node::Type::Empty || atom->type == Node::Type::BeginText ||
                atom->type == Node::Type::EndText)
                fail("missing argument to repetition operator", atom_pos);
            if (more() && peek() == '?') ++pos_;  // non-greedy: same match set
            auto rep = std::make_unique<Node>();
            rep->type = Node::Type::Repeat;
            rep->min = lo;
            rep->max = hi;
            rep->children.push_back(std::move(atom));
            atom = std::move(rep);
            repeated = true;
        }
        return atom;
    }

    static CharClass make_class(char32_t letter) {
        CharClass cls;
        switch (letter) {
            case 'd': case 'D':
                cls.ranges = {{'0', '9'}};
                break;
            case 'w': case 'W':
                cls.ranges = {{'0', '9'}, {'A', 'Z'}, {'a', 'z'}, {'_', '_'}};
                break;
            default:
                cls.ranges = {{'\t', '\n'}, {'\f', '\r'}, {' ', ' '}};
                break;
        }
        cls.negated = letter == 'D' || letter == 'W' || letter == 'S';
        return cls;
    }

    // Reads an escape after the backslash. Returns true and sets `cls` for class escapes.
    bool parse_escape(char32_t& ch, CharClass& cls, bool in_class) {
        std::size_t at = pos_ - 1;
        if (!more()) fail("trailing backslash", at);
        char32_t c = cps_[pos_++];
        switch (c) {
            case 'd': case 'D': case 'w': case 'W': case 's': case 'S':
                cls = make_class(c);
                return true;
            case 'n': ch = '\n'; return false;
            case 't': ch = '\t'; return false;
            case 'r': ch = '\r'; return false;
            case 'f': ch = '\f'; return false;
            case 'v': ch = '\v'; return false;
            case 'x': {
                auto hex = [](char32_t h) -> int {
                    if (h >= '0' && h <= '9') return static_cast<int>(h - '0');
                    if (h >= 'a' && h <= 'f') return static_cast<int>(h - 'a' + 10);
                    if (h >= 'A' && h <= 'F') return static_cast<int>(h - 'A' + 10);
                    return -1;
                };
                char32_t v = 0;
                if (more() && peek() == '{') {
                    ++pos_;
                    int digits = 0;
                    while (more() && peek() != '}') {
                        int h = hex(peek());
                        if (h < 0) fail("invalid escape sequence", at);
                        v = v * 16 + static_cast<char32_t>(h);
                        ++pos_;
                        ++digits;
                    }
                    if (!more() || digits == 0) fail("invalid escape sequence", at);
                    ++pos_;
                } else {
                    for (int k = 0; k < 2; ++k) {
                        if (!more() || hex(peek()) < 0) fail("invalid escape sequence", at);
                        v = v * 16 + static_cast<char32_t>(hex(peek()));
                        ++pos_;
                    }
                }
                ch = v;
                return false;
            }
            default:
                break;
        }
        if (c >= '1' && c <= '9') fail("backreferences are not supported", at);
        if (c == '0') {
            ch = 0;
            return false;
        }
        if (!in_class && (c == 'b' || c == 'B' || c == 'A' || c == 'z')) {
            ch = c;  // caller turns these into assertions
            return false;
        }
        if (c < 0x80 && is_word(c)) fail("invalid escape sequence", at);
        ch = c;
        return false;
    }

    std::unique_ptr<Node> parse_class() {
        std::size_t open = pos_ - 1;
        auto node = std::make_unique<Node>();
        node->type = Node::Type::Class;
        if (more() && peek() == '^') {
            node->cls.negated = true;
            ++pos_;
        }
        bool first = true;
        while (true) {
            if (!more()) fail("missing closing ]", open);
            char32_t c = peek();
            if (c == ']' && !first) {
                ++pos_;
                break;
            }
            first = false;
            ++pos_;
            char32_t lo = c;
            if (c == '\\') {
                CharClass sub;
                if (parse_escape(lo, sub, true)) {
                    if (sub.negated) {
                        // complement of the sub-class's ranges
                        char32_t next = 0;
                        auto rs = sub.ranges;
                        std::sort(rs.begin(), rs.end());
                        for (auto& r : rs) {
                            if (r.first > next) node->cls.ranges.emplace_back(next, r.first - 1);
                            next = r.second + 1;
                        }
                        node->cls.ranges.emplace_back(next, 0x10FFFF);
                    } else {
                        node->cls.ranges.insert(node->cls.ranges.end(), sub.ranges.begin(), sub.ranges.end());
                    }
                    continue;
                }
            }
            char32_t hi = lo;
            if (more() && peek() == '-' && pos_ + 1 < cps_.size() && cps_[pos_ + 1] != ']') {
                std::size_t dash = pos_;
                ++pos_;
                hi = cps_[pos_++];
                if (hi == '\\') {
                    CharClass sub;
                    if (parse_escape(hi, sub, true)) fail("bad character class range", dash);
                }
                if (hi < lo) fail("bad character class range", dash);
            }
            node->cls.ranges.emplace_back(lo, hi);
        }
        return node;
    }

    std::unique_ptr<Node> parse_atom() {
        std::size_t at = pos_;
        char32_t c = cps_[pos_++];
        auto node = std::make_unique<Node>();
        switch (c) {
            case '(': {
                if (more() && peek() == '?') {
                    if (pos_ + 1 < cps_.size() && cps_[pos_ + 1] == ':') {
                        pos_ += 2;
                    } else if (pos_ + 1 < cps_.size() &&
                               (cps_[pos_ + 1] == '=' || cps_[pos_ + 1] == '!' || cps_[pos_ + 1] == '<')) {
                        fail("lookaround assertions are not supported", at);
                    } else {
                        fail("unsupported group flags", at);
                    }
                }
                auto inner = parse_alternate();
                if (!more() || peek() != ')') fail("missing closing )", at);
                ++pos_;
                return inner;
            }
            case ')':
                fail("unmatched ')'", at);
            case '[':
                return parse_class();
            case '.':
                node->type = Node::Type::AnyChar;
                return node;
            case '^':
                node->type = Node::Type::BeginText;
                return node;
            case '$':
                node->type = Node::Type::EndText;
                return node;
            case '*': case '+': case '?':
                fail("missing argument to repetition operator", at);
            case '\\': {
                char32_t ch = 0;
                if (parse_escape(ch, node->cls, false)) {
                    node->type = Node::Type::Class;
                    return node;
                }
                bool assertion = pos_ >= 2 && cps_[pos_ - 2] == '\\';
                if (assertion && ch == 'b') node->type = Node::Type::WordBoundary;
                else if (assertion && ch == 'B') node->type = Node::Type::NotWordBoundary;
                else if (assertion && ch == 'A') node->type = Node::Type::BeginText;
                else if (assertion && ch == 'z') node->type = Node::Type::EndText;
                else {
                    node->type = Node::Type::Literal;
                    node->ch = ch;
                }
                return node;
            }
            default:
                node->type = Node::Type::Literal;
                node->ch = c;
                return node;
        }
    }

    std::string_view pattern_;
    std::vector<char32_t> cps_;
    std::vector<std::size_t> offsets_;
    std::size_t pos_ = 0;
};

struct Inst {
    enum class Op { Char, Class, Any, Split, Jmp, Match, Begin, End, WordB, NotWordB };
    Op op;
    char32_t ch = 0;
    std::size_t cls = 0;
    std::size_t x = 0;
    std::size_t y = 0;
};

class NfaCompiler {
public:
    std::vector<Inst> prog;
    std::vector<CharClass> classes;

    void emit(const Node& n) {
        using T = Node::Type;
        switch (n.type) {
            case T::Empty:
                break;
            case T::Literal:
                prog.push_back({Inst::Op::Char, n.ch});
                break;
            case T::Class:
                classes.push_back(n.cls);
                prog.push_back({Inst::Op::Class, 0, classes.size() - 1});
                break;
            case T::AnyChar:
                prog.push_back({Inst::Op::Any});
                break;
            case T::BeginText:
                prog.push_back({Inst::Op::Begin});
                break;
            case T::EndText:
                prog.push_back({Inst::Op::End});
                break;
            case T::WordBoundary:
                prog.push_back({Inst::Op::WordB});
                break;
            case T::NotWordBoundary:
                prog.push_back({Inst::Op::NotWordB});
                break;
            case T::Concat:
                for (auto& c : n.children) emit(*c);
                break;
            case T::Alternate: {
                std::vector<std::size_t> jumps;
                for (std::size_t i = 0; i + 1 < n.children.size(); ++i) {
                    std::size_t split = prog.size();
                    prog.push_back({Inst::Op::Split});
                    prog[split].x = prog.size();
                    emit(*n.children[i]);
                    jumps.push_back(prog.size());
                    prog.push_back({Inst::Op::Jmp});
                    prog[split].y = prog.size();
                }
                emit(*n.children.back());
                for (auto j : jumps) prog[j].x = prog.size();
                break;
            }
            case T::Repeat: {
                const Node& body = *n.children.front();
                for (int i = 0; i < n.min; ++i) emit(body);
                if (n.max == -1) {
                    std::size_t split = prog.size();
                    prog.push_back({Inst::Op::Split});
                    prog[split].x = prog.size();
                    emit(body);
                    prog.push_back({Inst::Op::Jmp, 0, 0, split});
                    prog[split].y = prog.size();
                } else {
                    std::vector<std::size_t> splits;
                    for (int i = n.min; i < n.max; ++i) {
                        splits.push_back(prog.size());
                        prog.push_back({Inst::Op::Split});
                        prog[splits.back()].x = prog.size();
                        emit(body);
                    }
                    for (auto s : splits) prog[s].y = prog.size();
                }
                break;
            }
        }
    }
};

}  // namespace detail

/// A compiled pattern. Matching is unanchored unless the pattern anchors itself.
class Regex {
public:
    static Regex compile(std::string_view pattern) {
        detail::PatternParser parser(pattern);
        auto root = parser.parse();
        detail::NfaCompiler c;
        c.emit(*root);
        c.prog.push_back({detail::Inst::Op::Match});
        Regex r;
        r.pattern_ = std::string(pattern);
        r.prog_ = std::move(c.prog);
        r.classes_ = std::move(c.classes);
        return r;
    }

    const std::string& pattern() const { return pattern_; }

    /// True if some substring of `text` matches.
    bool search(std::string_view text) const {
        auto cps = detail::decode_utf8(text);
        std::size_t n = prog_.size();
        std::vector<std::size_t> cur, next;
        std::vector<std::size_t> mark(n, static_cast<std::size_t>(-1));
        std::vector<std::size_t> stack;
        cur.reserve(n);
        next.reserve(n);

        auto add = [&](std::vector<std::size_t>& list, std::size_t pc, std::size_t pos, std::size_t gen) -> bool {
            stack.assign(1, pc);
            while (!stack.empty()) {
                std::size_t p = stack.back();
                stack.pop_back();
                if (mark[p] == gen) continue;
                mark[p] = gen;
                const auto& in = prog_[p];
                using Op = detail::Inst::Op;
                switch (in.op) {
                    case Op::Jmp:
                        stack.push_back(in.x);
                        break;
                    case Op::Split:
                        stack.push_back(in.y);
                        stack.push_back(in.x);
                        break;
                    case Op::Begin:
                        if (pos == 0) stack.push_back(p + 1);
                        break;
                    case Op::End:
                        if (pos == cps.size()) stack.push_back(p + 1);
                        break;
                    case Op::WordB:
                    case Op::NotWordB: {
                        bool before = pos > 0 && detail::is_word(cps[pos - 1]);
                        bool after = pos < cps.size() && detail::is_word(cps[pos]);
                        if ((before != after) == (in.op == Op::WordB)) stack.push_back(p + 1);
                        break;
                    }
                    case Op::Match:
                        return true;
                    default:
                        list.push_back(p);
                        break;
                }
            }
            return false;
        };

        // Each generation (2*pos, 2*pos+1) owns a fresh mark value so the
        // per-step dedup costs nothing to reset.
        for (std::size_t pos = 0;; ++pos) {
            if (add(cur, 0, pos, 2 * pos)) return true;
            if (pos == cps.size() || cur.empty()) {
                if (pos == cps.size()) return false;
                continue;
            }
            next.clear();
            char32_t c = cps[pos];
            for (std::size_t p : cur) {
                const auto& in = prog_[p];
                using Op = detail::Inst::Op;
                bool ok = (in.op == Op::Char && in.ch == c) || (in.op == Op::Class && classes_[in.cls].matches(c)) ||
                          (in.op == Op::Any && c != '\n');
                if (ok && add(next, p + 1, pos + 1, 2 * (pos + 1))) return true;
            }
            std::swap(cur, next);
        }
    }

private:
    std::string pattern_;
    std::vector<detail::Inst> prog_;
    std::vector<detail::CharClass> classes_;
};

/// Escapes every metacharacter so the result matches `literal` verbatim.
inline std::string escape(std::string_view literal) {
    static constexpr std::string_view meta = "\\.+*?()|[]{}^$";
    std::string out;
    for (char c : literal) {
        if (meta.find(c) != std::string_view::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace starquery::re
