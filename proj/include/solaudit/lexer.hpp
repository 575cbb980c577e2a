#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Comment- and string-aware lexical layer shared by the parser, the call-graph
// builder, the mutator and the local embedding provider.
namespace solaudit::lex {

struct Span {
    std::size_t begin = 0;  // byte offset, inclusive
    std::size_t end = 0;    // byte offset, exclusive
};

struct Comment {
    Span span;
    int first_line = 0;
    int last_line = 0;
    bool block = false;
};

enum class TokenKind { Identifier, Number, Punct };

struct Token {
    TokenKind kind = TokenKind::Punct;
    std::size_t offset = 0;
    std::size_t length = 0;
    int line = 0;
};

// Maps byte offsets to 1-based line numbers.
class LineIndex {
public:
    LineIndex() = default;
    explicit LineIndex(std::string_view text);

    int line_of(std::size_t offset) const;
    std::size_t line_start(int line) const;
    int line_count() const { return static_cast<int>(starts_.size()); }

private:
    std::vector<std::size_t> starts_;
};

// A source text together with its comment and string-literal spans.
// `code` is the text with comment bytes and string-literal contents replaced
// by spaces (quotes and newlines are kept), so offsets and line numbers are
// identical to the original.
struct LexedSource {
    std::string text;
    std::string code;
    std::vector<Comment> comments;
    std::vector<Span> strings;
    LineIndex lines;
};

LexedSource lex_source(std::string_view text);

// The text with every comment removed (replaced by whitespace, newlines kept).
std::string strip_comments(std::string_view text);

// Tokenizes masked code (the `code` field of a LexedSource).
std::vector<Token> tokenize(std::string_view code, const LineIndex& lines);

inline std::string_view token_text(std::string_view code, const Token& tok) {
    return code.substr(tok.offset, tok.length);
}

std::vector<std::string> split_lines(std::string_view text);

bool is_identifier_start(char c) noexcept;
bool is_identifier_char(char c) noexcept;
bool is_valid_identifier(std::string_view name) noexcept;

// Reserved words, elementary type names and global builtins that are never
// user-declared variables or functions.
bool is_keyword(std::string_view word) noexcept;
bool is_elementary_type(std::string_view word) noexcept;

}  // namespace solaudit::lex
