#include "solaudit/source.hpp"

#include "solaudit/error.hpp"
#include "solaudit/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace solaudit {

std::string_view to_string(FunctionKind kind) noexcept {
    switch (kind) {
        case FunctionKind::Function: return "function";
        case FunctionKind::Constructor: return "constructor";
        case FunctionKind::Fallback: return "fallback";
        case FunctionKind::Receive: return "receive";
        case FunctionKind::Modifier: return "modifier";
    }
    return "function";
}

std::string_view to_string(Visibility visibility) noexcept {
    switch (visibility) {
        case Visibility::Public: return "public";
        case Visibility::External: return "external";
        case Visibility::Internal: return "internal";
        case Visibility::Private: return "private";
        case Visibility::Unspecified: return "unspecified";
    }
    return "unspecified";
}

std::optional<FunctionKind> function_kind_from_string(std::string_view text) noexcept {
    for (auto kind : {FunctionKind::Function, FunctionKind::Constructor, FunctionKind::Fallback,
                      FunctionKind::Receive, FunctionKind::Modifier}) {
        if (to_string(kind) == text) return kind;
    }
    return std::nullopt;
}

std::optional<Visibility> visibility_from_string(std::string_view text) noexcept {
    for (auto vis : {Visibility::Public, Visibility::External, Visibility::Internal,
                     Visibility::Private, Visibility::Unspecified}) {
        if (to_string(vis) == text) return vis;
    }
    return std::nullopt;
}

const FunctionUnit* SourceUnit::find_function(std::string_view name) const {
    const auto it = std::find_if(functions.begin(), functions.end(),
                                 [&](const FunctionUnit& f) { return f.name == name; });
    return it == functions.end() ? nullptr : &*it;
}

bool is_swc_id(std::string_view text) {
    static const std::regex pattern(R"(SWC-[0-9]{1,3})");
    return std::regex_match(text.begin(), text.end(), pattern);
}

namespace {

constexpr std::size_t kNoMatch = static_cast<std::size_t>(-1);

using lex::Token;
using lex::TokenKind;

class Parser {
public:
    Parser(std::string_view source, std::string_view file_name)
        : lexed_(lex::lex_source(source)), file_name_(file_name) {
        tokens_ = lex::tokenize(lexed_.code, lexed_.lines);
        raw_lines_ = lex::split_lines(source);
        code_lines_ = lex::split_lines(lexed_.code);
        match_pairs();
    }

    std::vector<SourceUnit> run() {
        std::vector<std::string> pragmas;
        std::vector<std::string> type_names;
        struct ContractSpan {
            std::string kind;
            std::string name;
            std::string inheritance;
            std::size_t open = 0;
            std::size_t close = 0;
        };
        std::vector<ContractSpan> contracts;

        int depth = 0;
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            const std::string_view t = text(i);
            if (t == "{") ++depth;
            if (t == "}") --depth;
            if (tokens_[i].kind != TokenKind::Identifier) continue;

            const bool declares_type = t == "contract" || t == "library" || t == "interface" ||
                                       t == "struct" || t == "enum";
            if (declares_type && i + 1 < tokens_.size() &&
                tokens_[i + 1].kind == TokenKind::Identifier) {
                type_names.emplace_back(text(i + 1));
            }
            if (depth != 0) continue;

            if (t == "pragma") {
                const std::size_t semi = find_forward(i, ";");
                if (semi != kNoMatch) {
                    pragmas.push_back(slice_text(i, semi));
                    i = semi;
                }
                continue;
            }
            if ((t == "contract" || t == "library" || t == "interface") && i + 1 < tokens_.size() &&
                tokens_[i + 1].kind == TokenKind::Identifier) {
                ContractSpan span;
                span.kind = std::string(t);
                if (i > 0 && text(i - 1) == "abstract") span.kind = "abstract contract";
                span.name = std::string(text(i + 1));
                std::size_t j = i + 2;
                std::size_t is_at = kNoMatch;
                while (j < tokens_.size() && text(j) != "{" && text(j) != ";") {
                    if (text(j) == "is" && is_at == kNoMatch) is_at = j;
                    ++j;
                }
                if (j >= tokens_.size() || text(j) != "{") continue;
                if (is_at != kNoMatch && is_at + 1 < j) {
                    span.inheritance = collapse_ws(lexed_.text.substr(
                        tokens_[is_at + 1].offset, tokens_[j].offset - tokens_[is_at + 1].offset));
                }
                span.open = j;
                span.close = match_[j];
                contracts.push_back(span);
            }
        }

        if (contracts.empty()) {
            throw Error(ErrorKind::EmptySource,
                        "no contract declaration found in " + std::string(file_name_));
        }

        std::vector<SourceUnit> units;
        units.reserve(contracts.size());
        for (const auto& span : contracts) {
            SourceUnit unit;
            unit.file_name = std::string(file_name_);
            unit.contract_name = span.name;
            unit.contract_kind = span.kind;
            unit.inheritance = span.inheritance;
            unit.pragmas = pragmas;
            unit.type_names = type_names;
            unit.raw_lines = raw_lines_;
            parse_members(unit, span.open + 1, span.close);
            units.push_back(std::move(unit));
        }
        return units;
    }

private:
    std::string_view text(std::size_t i) const { return lex::token_text(lexed_.code, tokens_[i]); }

    std::string slice_text(std::size_t first, std::size_t last) const {
        const std::size_t begin = tokens_[first].offset;
        const std::size_t end = tokens_[last].offset + tokens_[last].length;
        return lexed_.text.substr(begin, end - begin);
    }

    static std::string collapse_ws(std::string_view s) {
        std::string out;
        bool pending_space = false;
        for (const char c : s) {
            if (std::isspace(static_cast<unsigned char>(c)) != 0) {
                pending_space = !out.empty();
                continue;
            }
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
        return out;
    }

    void match_pairs() {
        match_.assign(tokens_.size(), kNoMatch);
        std::vector<std::size_t> braces;
        std::vector<std::size_t> parens;
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            const std::string_view t = text(i);
            if (t == "{") {
                braces.push_back(i);
            } else if (t == "}") {
                if (braces.empty()) {
                    throw Error(ErrorKind::UnbalancedBraces,
                                std::string(file_name_) + ": unexpected '}' at line " +
                                    std::to_string(tokens_[i].line));
                }
                match_[braces.back()] = i;
                match_[i] = braces.back();
                braces.pop_back();
            } else if (t == "(") {
                parens.push_back(i);
            } else if (t == ")" && !parens.empty()) {
                match_[parens.back()] = i;
                match_[i] = parens.back();
                parens.pop_back();
            }
        }
        if (!braces.empty()) {
            throw Error(ErrorKind::UnbalancedBraces,
                        std::string(file_name_) + ": '{' at line " +
                            std::to_string(tokens_[braces.back()].line) + " is never closed");
        }
    }

    // First token equal to `target` at parenthesis depth 0, starting at `from`.
    std::size_t find_forward(std::size_t from, std::string_view target,
                             std::size_t limit = kNoMatch) const {
        const std::size_t end = std::min(limit, tokens_.size());
        for (std::size_t j = from; j < end; ++j) {
            if (text(j) == target) return j;
            if (text(j) == "(" && match_[j] != kNoMatch) j = match_[j];
        }
        return kNoMatch;
    }

    // First `{` or `;` at parenthesis depth 0.
    std::size_t find_body_or_end(std::size_t from, std::size_t limit) const {
        for (std::size_t j = from; j < limit; ++j) {
            const std::string_view t = text(j);
            if (t == "{" || t == ";") return j;
            if (t == "(" && match_[j] != kNoMatch) j = match_[j];
        }
        return kNoMatch;
    }

    std::optional<std::string> doc_comment_before(int line) const {
        std::vector<std::string> block;
        for (int l = line - 1; l >= 1; --l) {
            const auto idx = static_cast<std::size_t>(l - 1);
            if (idx >= raw_lines_.size() || idx >= code_lines_.size()) break;
            const auto blank = [](const std::string& s) {
                return std::all_of(s.begin(), s.end(), [](char c) {
                    return std::isspace(static_cast<unsigned char>(c)) != 0;
                });
            };
            if (!blank(code_lines_[idx]) || blank(raw_lines_[idx])) break;
            const auto& raw = raw_lines_[idx];
            const auto first = raw.find_first_not_of(" \t");
            block.push_back(raw.substr(first));
        }
        if (block.empty()) return std::nullopt;
        std::reverse(block.begin(), block.end());
        std::string out;
        for (std::size_t k = 0; k < block.size(); ++k) {
            if (k > 0) out.push_back('\n');
            out += block[k];
        }
        return out;
    }

    void parse_members(SourceUnit& unit, std::size_t begin, std::size_t end) {
        std::size_t i = begin;
        while (i < end) {
            const std::string_view t = text(i);
            if (t == "function" || t == "constructor" || t == "modifier" || t == "fallback" ||
                t == "receive") {
                i = parse_function(unit, i, end);
            } else if (t == "event") {
                const std::size_t semi = find_forward(i, ";", end);
                if (semi == kNoMatch) break;
                if (i + 1 < semi && tokens_[i + 1].kind == TokenKind::Identifier) {
                    EventDecl ev;
                    ev.name = std::string(text(i + 1));
                    ev.decl_line = tokens_[i].line;
                    ev.full_text = slice_text(i, semi);
                    unit.events.push_back(std::move(ev));
                }
                i = semi + 1;
            } else {
                const std::size_t stop = find_body_or_end(i, end);
                if (stop == kNoMatch) break;
                if (text(stop) == "{") {
                    // struct, enum or anything else carrying a block
                    i = match_[stop] + 1;
                    continue;
                }
                const bool directive = t == "using" || t == "error" || t == "pragma" ||
                                       t == "import" || t == ";";
                if (!directive) parse_state_var(unit, i, stop);
                i = stop + 1;
            }
        }
    }

    std::size_t parse_function(SourceUnit& unit, std::size_t i, std::size_t end) {
        const std::string_view keyword = text(i);
        const std::size_t body = find_body_or_end(i + 1, end);
        if (body == kNoMatch) return end;
        if (text(body) == ";") return body + 1;  // declaration without a body

        FunctionUnit fn;
        std::size_t header_from = i + 1;
        if (keyword == "function") {
            if (i + 1 < body && tokens_[i + 1].kind == TokenKind::Identifier) {
                fn.name = std::string(text(i + 1));
                fn.kind = fn.name == unit.contract_name ? FunctionKind::Constructor
                                                        : FunctionKind::Function;
                header_from = i + 2;
            } else {
                fn.name = "fallback";
                fn.kind = FunctionKind::Fallback;
            }
        } else if (keyword == "modifier") {
            fn.kind = FunctionKind::Modifier;
            if (i + 1 < body && tokens_[i + 1].kind == TokenKind::Identifier) {
                fn.name = std::string(text(i + 1));
                header_from = i + 2;
            }
        } else {
            fn.name = std::string(keyword);
            fn.kind = *function_kind_from_string(keyword);
        }

        for (std::size_t j = header_from; j < body; ++j) {
            const std::string_view h = text(j);
            if (h == "(" && match_[j] != kNoMatch) {
                j = match_[j];
                continue;
            }
            if (auto vis = visibility_from_string(h); vis && *vis != Visibility::Unspecified) {
                fn.visibility = *vis;
                break;
            }
        }

        const std::size_t close = match_[body];
        fn.start_line = tokens_[i].line;
        fn.end_line = tokens_[close].line;
        fn.body_text = slice_text(i, close);
        fn.doc_comment = doc_comment_before(fn.start_line);
        unit.functions.push_back(std::move(fn));
        return close + 1;
    }

    void parse_state_var(SourceUnit& unit, std::size_t first, std::size_t semi) {
        if (semi - first < 2) return;
        std::size_t name_limit = semi;
        for (std::size_t j = first; j < semi; ++j) {
            const std::string_view t = text(j);
            if (t == "(" && match_[j] != kNoMatch) {
                j = match_[j];
                continue;
            }
            if (t == "=") {
                name_limit = j;
                break;
            }
        }
        std::size_t name_at = kNoMatch;
        for (std::size_t j = name_limit; j > first; --j) {
            if (tokens_[j - 1].kind == TokenKind::Identifier) {
                name_at = j - 1;
                break;
            }
            if (text(j - 1) != "]" && text(j - 1) != ")") break;
        }
        if (name_at == kNoMatch || name_at == first) return;
        const std::string_view name = text(name_at);
        if (lex::is_keyword(name) || !lex::is_valid_identifier(name)) return;

        // Type: `mapping(...)`, or a (possibly qualified) name with array suffixes.
        std::size_t type_end = first;
        if (text(first) == "mapping" && first + 1 < semi && text(first + 1) == "(" &&
            match_[first + 1] != kNoMatch) {
            type_end = match_[first + 1];
        } else {
            while (type_end + 2 < semi && text(type_end + 1) == "." &&
                   tokens_[type_end + 2].kind == TokenKind::Identifier) {
                type_end += 2;
            }
            if (text(type_end) == "address" && type_end + 1 < name_at &&
                text(type_end + 1) == "payable") {
                ++type_end;
            }
        }
        while (type_end + 1 < name_at && text(type_end + 1) == "[") {
            std::size_t k = type_end + 1;
            while (k < name_at && text(k) != "]") ++k;
            if (k >= name_at) break;
            type_end = k;
        }

        StateVarDecl var;
        var.name = std::string(name);
        var.declared_type = slice_text(first, type_end);
        var.decl_line = tokens_[first].line;
        var.full_text = slice_text(first, semi);
        unit.state_vars.push_back(std::move(var));
    }

    lex::LexedSource lexed_;
    std::string_view file_name_;
    std::vector<Token> tokens_;
    std::vector<std::string> raw_lines_;
    std::vector<std::string> code_lines_;
    std::vector<std::size_t> match_;
};

int parse_line_number(const std::string& digits) {
    if (digits.size() > 9) return -1;
    return std::stoi(digits);
}

}  // namespace

std::vector<SourceUnit> parse_all(std::string_view source, std::string_view file_name) {
    Parser parser(source, file_name);
    return parser.run();
}

SourceUnit parse_source(std::string_view source, std::string_view file_name,
                        std::optional<std::string_view> contract_filter) {
    auto units = parse_all(source, file_name);
    if (!contract_filter) return std::move(units.front());
    for (auto& unit : units) {
        if (unit.contract_name == *contract_filter) return std::move(unit);
    }
    throw Error(ErrorKind::EmptySource, "no contract named '" + std::string(*contract_filter) +
                                            "' in " + std::string(file_name));
}

std::vector<SwcAnnotation> extract_annotations(std::string_view source) {
    static const std::regex pattern(
        R"(^//+[ \t]*(SWC-[0-9]{1,3})[ \t]*:[ \t]*L([0-9]+)(?:[ \t]*-[ \t]*L?([0-9]+))?)");
    const auto lexed = lex::lex_source(source);
    std::vector<SwcAnnotation> out;
    for (const auto& cm : lexed.comments) {
        if (cm.block) continue;
        const std::string body = lexed.text.substr(cm.span.begin, cm.span.end - cm.span.begin);
        std::smatch m;
        if (!std::regex_search(body, m, pattern)) continue;
        SwcAnnotation ann;
        ann.swc_id = m[1].str();
        ann.start_line = parse_line_number(m[2].str());
        ann.end_line = m[3].matched ? parse_line_number(m[3].str()) : ann.start_line;
        ann.comment_line = cm.first_line;
        if (ann.start_line < 1 || ann.end_line < ann.start_line) continue;
        out.push_back(std::move(ann));
    }
    return out;
}

TagResult tag_functions(SourceUnit unit, const std::vector<SwcAnnotation>& annotations) {
    TagResult result;
    for (const auto& ann : annotations) {
        bool hit = false;
        for (auto& fn : unit.functions) {
            if (ann.start_line <= fn.end_line && fn.start_line <= ann.end_line) {
                fn.swc_tags.insert(ann.swc_id);
                hit = true;
            }
        }
        if (!hit) result.orphaned.push_back(ann);
    }
    result.unit = std::move(unit);
    return result;
}

}  // namespace solaudit
