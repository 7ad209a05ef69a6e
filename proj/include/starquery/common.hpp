#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace starquery {

/// 1-based line/column plus 0-based byte offset into the source text.
struct SourcePos {
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t offset = 0;

    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

inline std::string to_string(const SourcePos& pos) {
    return std::to_string(pos.line) + ":" + std::to_string(pos.col);
}

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A syntax error in one of the textual inputs (StarLang, Codesearch, toy sources, regexes).
class ParseError : public Error {
public:
    ParseError(const std::string& message, SourcePos pos)
        : Error(to_string(pos) + ": " + message), message_(message), pos_(pos) {}

    const std::string& message() const noexcept { return message_; }
    const SourcePos& pos() const noexcept { return pos_; }

private:
    std::string message_;
    SourcePos pos_;
};

/// The facts document could not be turned into a Database.
class LoadError : public Error {
public:
    using Error::Error;
};

/// A query or program is well-formed text but cannot be compiled or evaluated.
class CompileError : public Error {
public:
    using Error::Error;
};

/// Tracks line/column while scanning a byte buffer.
class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    bool at_end() const { return pos_.offset >= text_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_.offset + ahead < text_.size() ? text_[pos_.offset + ahead] : '\0';
    }
    char advance() {
        char c = text_[pos_.offset++];
        if (c == '\n') {
            ++pos_.line;
            pos_.col = 1;
        } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
            ++pos_.col;  // count code points, not continuation bytes
        }
        return c;
    }
    bool starts_with(std::string_view s) const { return text_.substr(pos_.offset, s.size()) == s; }
    const SourcePos& pos() const { return pos_; }
    std::string_view text() const { return text_; }

private:
    std::string_view text_;
    SourcePos pos_;
};

inline bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

}  // namespace starquery
