#include "solaudit/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace solaudit::lex {

LineIndex::LineIndex(std::string_view text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n' && i + 1 < text.size()) {
            starts_.push_back(i + 1);
        }
    }
}

int LineIndex::line_of(std::size_t offset) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    return static_cast<int>(it - starts_.begin());
}

std::size_t LineIndex::line_start(int line) const {
    if (line < 1) return 0;
    if (line > line_count()) return starts_.back();
    return starts_[static_cast<std::size_t>(line - 1)];
}

LexedSource lex_source(std::string_view text) {
    LexedSource out;
    out.text = std::string(text);
    out.code = out.text;
    out.lines = LineIndex(text);

    const std::size_t n = text.size();
    std::size_t i = 0;
    auto blank = [&](std::size_t from, std::size_t to) {
        for (std::size_t k = from; k < to; ++k) {
            if (out.code[k] != '\n') out.code[k] = ' ';
        }
    };

    while (i < n) {
        const char c = text[i];
        if (c == '/' && i + 1 < n && text[i + 1] == '/') {
            std::size_t end = text.find('\n', i);
            if (end == std::string_view::npos) end = n;
            Comment cm;
            cm.span = {i, end};
            cm.first_line = out.lines.line_of(i);
            cm.last_line = cm.first_line;
            cm.block = false;
            out.comments.push_back(cm);
            blank(i, end);
            i = end;
        } else if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            std::size_t close = text.find("*/", i + 2);
            const std::size_t end = close == std::string_view::npos ? n : close + 2;
            Comment cm;
            cm.span = {i, end};
            cm.first_line = out.lines.line_of(i);
            cm.last_line = out.lines.line_of(end - 1);
            cm.block = true;
            out.comments.push_back(cm);
            blank(i, end);
            i = end;
        } else if (c == '"' || c == '\'') {
            // String literals cannot span lines; an unterminated literal ends
            // at the newline so one bad quote does not swallow the file.
            std::size_t j = i + 1;
            while (j < n && text[j] != c && text[j] != '\n') {
                if (text[j] == '\\' && j + 1 < n && text[j + 1] != '\n') ++j;
                ++j;
            }
            const std::size_t content_end = j;
            const std::size_t end = (j < n && text[j] == c) ? j + 1 : j;
            out.strings.push_back({i, end});
            blank(i + 1, content_end);
            i = end;
        } else {
            ++i;
        }
    }
    return out;
}

std::string strip_comments(std::string_view text) {
    const LexedSource lexed = lex_source(text);
    std::string out = lexed.text;
    for (const auto& cm : lexed.comments) {
        for (std::size_t k = cm.span.begin; k < cm.span.end; ++k) {
            if (out[k] != '\n') out[k] = ' ';
        }
    }
    return out;
}

bool is_identifier_start(char c) noexcept {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

bool is_identifier_char(char c) noexcept {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

bool is_valid_identifier(std::string_view name) noexcept {
    if (name.empty() || !is_identifier_start(name.front())) return false;
    return std::all_of(name.begin(), name.end(), is_identifier_char);
}

std::vector<Token> tokenize(std::string_view code, const LineIndex& lines) {
    std::vector<Token> tokens;
    const std::size_t n = code.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = code[i];
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            ++i;
            continue;
        }
        Token tok;
        tok.offset = i;
        if (is_identifier_start(c)) {
            std::size_t j = i + 1;
            while (j < n && is_identifier_char(code[j])) ++j;
            tok.kind = TokenKind::Identifier;
            tok.length = j - i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
            std::size_t j = i + 1;
            while (j < n && (is_identifier_char(code[j]) || code[j] == '.')) ++j;
            tok.kind = TokenKind::Number;
            tok.length = j - i;
        } else {
            tok.kind = TokenKind::Punct;
            tok.length = 1;
        }
        tok.line = lines.line_of(i);
        tokens.push_back(tok);
        i += tok.length;
    }
    return tokens;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = end + 1;
    }
    return lines;
}

namespace {

constexpr std::array kKeywords = {
    "abstract", "address", "anonymous", "as", "assembly", "assert", "block", "bool",
    "break", "byte", "bytes", "calldata", "catch", "constant", "constructor",
    "continue", "contract", "delete", "do", "else", "emit", "enum", "error", "event",
    "external", "fallback", "false", "fixed", "for", "function", "gasleft", "hex",
    "if", "immutable", "import", "indexed", "int", "interface", "internal", "is",
    "keccak256", "library", "mapping", "memory", "modifier", "msg", "new", "now",
    "override", "payable", "pragma", "private", "public", "pure", "receive",
    "require", "return", "returns", "revert", "selfdestruct", "sha256", "ripemd160",
    "ecrecover", "addmod", "mulmod", "storage", "string", "struct", "super", "this",
    "throw", "true", "try", "tx", "type", "ufixed", "uint", "unchecked", "unicode",
    "using", "var", "view", "virtual", "while", "abi", "suicide", "wei", "gwei",
    "ether", "seconds", "minutes", "hours", "days", "weeks", "years", "_",
};

bool has_width_suffix(std::string_view word, std::string_view prefix, int lo, int hi) {
    if (word.size() <= prefix.size() || word.substr(0, prefix.size()) != prefix) return false;
    const std::string_view digits = word.substr(prefix.size());
    if (!std::all_of(digits.begin(), digits.end(),
                     [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; })) {
        return false;
    }
    if (digits.size() > 3 || digits.front() == '0') return false;
    int width = 0;
    for (const char ch : digits) width = width * 10 + (ch - '0');
    return width >= lo && width <= hi;
}

}  // namespace

bool is_elementary_type(std::string_view word) noexcept {
    static constexpr std::array kPlain = {"address", "bool", "string", "bytes", "byte",
                                          "int",     "uint", "fixed",  "ufixed", "var"};
    if (std::find(kPlain.begin(), kPlain.end(), word) != kPlain.end()) return true;
    return has_width_suffix(word, "uint", 8, 256) || has_width_suffix(word, "int", 8, 256) ||
           has_width_suffix(word, "bytes", 1, 32);
}

bool is_keyword(std::string_view word) noexcept {
    if (std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end()) return true;
    return is_elementary_type(word);
}

}  // namespace solaudit::lex
