#include "solaudit/evalharness.hpp"

#include "solaudit/error.hpp"
#include "solaudit/hash.hpp"
#include "solaudit/lexer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace solaudit {

namespace {

using lex::Token;
using lex::TokenKind;

// Unbiased draw in [0, n) by rejection; independent of the standard
// library's distribution implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t reject_below = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= reject_below) return r % n;
    }
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[bounded(rng, i)]);
    }
}

// k sorted picks from [0, candidates): distinct while possible, then repeats.
std::vector<std::size_t> pick_positions(std::size_t candidates, std::size_t k,
                                        std::mt19937_64& rng) {
    std::vector<std::size_t> order(candidates);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    std::vector<std::size_t> picks(order.begin(),
                                   order.begin() + static_cast<std::ptrdiff_t>(std::min(k, candidates)));
    while (picks.size() < k) picks.push_back(bounded(rng, candidates));
    std::sort(picks.begin(), picks.end());
    return picks;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t step) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * step);
}

std::vector<SourceUnit> parse_checked(std::string_view source, const char* what) {
    try {
        return parse_all(source, "mutant.sol");
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseFailure, std::string(what) + ": " + e.what());
    }
}

struct Lexed {
    lex::LexedSource src;
    std::vector<Token> tokens;

    explicit Lexed(std::string_view text)
        : src(lex::lex_source(text)), tokens(lex::tokenize(src.code, src.lines)) {}

    std::string_view text_of(std::size_t i) const { return lex::token_text(src.code, tokens[i]); }

    // Line `line` of the masked code without its newline.
    std::string_view code_line(int line) const {
        const std::size_t begin = src.lines.line_start(line);
        const std::size_t end = line < src.lines.line_count() ? src.lines.line_start(line + 1) - 1
                                                              : src.code.size();
        return std::string_view(src.code).substr(begin, end - begin);
    }

    std::string_view text_line(int line) const {
        const std::size_t begin = src.lines.line_start(line);
        const std::size_t end = line < src.lines.line_count() ? src.lines.line_start(line + 1) - 1
                                                              : src.text.size();
        return std::string_view(src.text).substr(begin, end - begin);
    }

    bool inside_comment(std::size_t offset) const {
        return std::any_of(src.comments.begin(), src.comments.end(), [&](const lex::Comment& c) {
            return c.span.begin < offset && offset < c.span.end;
        });
    }
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string leading_whitespace(std::string_view line) {
    const auto end = line.find_first_not_of(" \t");
    return std::string(line.substr(0, end == std::string_view::npos ? line.size() : end));
}

bool is_declaration_prefix(std::string_view word) {
    static const std::set<std::string_view> kPrefixes{"memory", "storage", "calldata", "payable"};
    return lex::is_elementary_type(word) || kPrefixes.count(word) != 0 || !lex::is_keyword(word);
}

bool in_function_lines(const std::vector<std::pair<int, int>>& spans, int line) {
    return std::any_of(spans.begin(), spans.end(),
                       [&](const auto& s) { return s.first <= line && line <= s.second; });
}

std::vector<std::string> collect_variables(const Lexed& lx, const std::vector<SourceUnit>& units) {
    std::set<std::string> excluded;
    std::set<std::string> names;
    std::vector<std::pair<int, int>> spans;
    for (const auto& unit : units) {
        excluded.insert(unit.contract_name);
        excluded.insert(unit.type_names.begin(), unit.type_names.end());
        for (const auto& ev : unit.events) excluded.insert(ev.name);
        for (const auto& fn : unit.functions) {
            excluded.insert(fn.name);
            spans.emplace_back(fn.start_line, fn.end_line);
        }
        for (const auto& var : unit.state_vars) names.insert(var.name);
    }
    const auto& toks = lx.tokens;
    for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::Identifier) continue;
        const std::string_view name = lx.text_of(i);
        if (lex::is_keyword(name) || !in_function_lines(spans, toks[i].line)) continue;
        const std::string_view next = lx.text_of(i + 1);
        if (next != "," && next != ")" && next != ";" && next != "=") continue;
        const std::string_view prev = lx.text_of(i - 1);
        const bool typed = (toks[i - 1].kind == TokenKind::Identifier && is_declaration_prefix(prev)) ||
                           prev == "]";
        if (typed) names.emplace(name);
    }
    std::vector<std::string> out;
    for (const auto& n : names) {
        if (!excluded.count(n) && lex::is_valid_identifier(n) && !lex::is_keyword(n)) out.push_back(n);
    }
    return out;
}

struct Edit {
    std::size_t begin;
    std::size_t end;
    std::string replacement;
};

std::string apply_edits(const std::string& text, std::vector<Edit> edits) {
    std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    std::string out;
    std::size_t pos = 0;
    for (const auto& e : edits) {
        out.append(text, pos, e.begin - pos);
        out += e.replacement;
        pos = e.end;
    }
    out.append(text, pos, std::string::npos);
    return out;
}

std::string rename_variables(const std::string& text, double fraction, std::uint64_t seed,
                             MutationResult& result) {
    const Lexed lx(text);
    const auto units = parse_checked(text, "input does not parse");
    std::vector<std::string> vars = collect_variables(lx, units);
    const std::size_t count = fraction_count(fraction, vars.size());
    if (count == 0) return text;

    std::mt19937_64 rng(seed);
    shuffle(vars, rng);
    std::set<std::string> taken;
    for (std::size_t i = 0; i < lx.tokens.size(); ++i) {
        if (lx.tokens[i].kind == TokenKind::Identifier) taken.emplace(lx.text_of(i));
    }
    std::map<std::string, std::string> renames;
    std::size_t counter = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::string fresh;
        do {
            fresh = "v_" + std::to_string(++counter);
        } while (taken.count(fresh) != 0);
        renames[vars[i]] = fresh;
    }

    std::vector<Edit> edits;
    const auto& toks = lx.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::Identifier) continue;
        const auto it = renames.find(std::string(lx.text_of(i)));
        if (it == renames.end()) continue;
        const std::string_view prev = i > 0 ? lx.text_of(i - 1) : std::string_view{};
        const std::string_view next = i + 1 < toks.size() ? lx.text_of(i + 1) : std::string_view{};
        if (prev == ".") continue;                                        // member access
        if (next == ":" && (prev == "{" || prev == ",")) continue;        // named argument
        edits.push_back({toks[i].offset, toks[i].offset + toks[i].length, it->second});
    }
    result.renames.insert(renames.begin(), renames.end());
    return apply_edits(text, std::move(edits));
}

bool is_word_at(std::string_view code, std::size_t i, std::string_view word) {
    if (code.compare(i, word.size(), word) != 0) return false;
    if (i > 0 && lex::is_identifier_char(code[i - 1])) return false;
    const std::size_t after = i + word.size();
    return after >= code.size() || !lex::is_identifier_char(code[after]);
}

bool ends_with_token(std::string_view line, std::string_view word) {
    line = trim(line);
    if (line.size() < word.size() || line.substr(line.size() - word.size()) != word) return false;
    return line.size() == word.size() || !lex::is_identifier_char(line[line.size() - word.size() - 1]);
}

// Lines after which a statement may be inserted: inside a function body, at
// paren depth 0, ending in ';' or '{', outside inline assembly, and not the
// brace-less body of a control statement.
std::vector<int> statement_boundaries(const Lexed& lx, const std::vector<SourceUnit>& units) {
    std::set<int> lines;
    const std::string_view code = lx.src.code;
    for (const auto& unit : units) {
        for (const auto& fn : unit.functions) {
            int paren = 0;
            int brace = 0;
            bool pending_assembly = false;
            int assembly_depth = -1;
            std::string_view prev_code_line;
            for (int line = fn.start_line; line < fn.end_line; ++line) {
                const std::size_t begin = lx.src.lines.line_start(line);
                const std::string_view text = lx.code_line(line);
                bool touched_assembly = assembly_depth >= 0;
                for (std::size_t k = 0; k < text.size(); ++k) {
                    const char c = text[k];
                    if (c == 'a' && is_word_at(code, begin + k, "assembly")) {
                        pending_assembly = true;
                        touched_assembly = true;
                    } else if (c == '(') {
                        ++paren;
                    } else if (c == ')') {
                        --paren;
                    } else if (c == '{') {
                        if (pending_assembly) {
                            assembly_depth = brace;
                            pending_assembly = false;
                        }
                        ++brace;
                    } else if (c == '}') {
                        --brace;
                        if (assembly_depth >= 0 && brace == assembly_depth) assembly_depth = -1;
                    }
                }
                const std::string_view t = trim(text);
                if (t.empty()) continue;
                const bool braceless_body =
                    !prev_code_line.empty() && t.front() != '{' &&
                    (prev_code_line.back() == ')' || ends_with_token(prev_code_line, "else") ||
                     ends_with_token(prev_code_line, "do"));
                const std::size_t eol = begin + text.size();
                if (paren == 0 && brace >= 1 && !touched_assembly && assembly_depth < 0 &&
                    (t.back() == ';' || t.back() == '{') && !braceless_body &&
                    !lx.inside_comment(eol)) {
                    lines.insert(line);
                }
                prev_code_line = t;
            }
        }
    }
    return {lines.begin(), lines.end()};
}

std::string insert_dead_code(const std::string& text, int blocks, std::uint64_t seed,
                             MutationResult& result) {
    if (blocks <= 0) return text;
    const Lexed lx(text);
    const auto units = parse_checked(text, "input does not parse");
    const std::vector<int> candidates = statement_boundaries(lx, units);
    if (candidates.empty()) return text;

    std::mt19937_64 rng(seed);
    std::vector<Edit> edits;
    for (const std::size_t pick :
         pick_positions(candidates.size(), static_cast<std::size_t>(blocks), rng)) {
        const int line = candidates[pick];
        std::string indent = leading_whitespace(lx.text_line(line));
        if (trim(lx.code_line(line)).back() == '{') indent += "    ";
        const std::size_t eol = lx.src.lines.line_start(line) + lx.text_line(line).size();
        edits.push_back({eol, eol, "\n" + indent + std::string(kDeadCodeTemplate)});
    }
    result.dead_blocks_inserted += blocks;
    return apply_edits(text, std::move(edits));
}

constexpr std::array<std::string_view, 8> kCommentPhrases{
    "TODO: review",       "checked",          "see documentation", "keep in sync",
    "temporary",          "note: gas",        "legacy behaviour",  "refactor later",
};

std::string add_comments(const std::string& text, int count, std::uint64_t seed,
                         MutationResult& result) {
    if (count <= 0) return text;
    const Lexed lx(text);
    std::vector<int> candidates;
    for (int line = 1; line <= lx.src.lines.line_count(); ++line) {
        if (!lx.inside_comment(lx.src.lines.line_start(line))) candidates.push_back(line);
    }
    if (candidates.empty()) return text;

    std::mt19937_64 rng(seed);
    std::vector<Edit> edits;
    for (const std::size_t pick :
         pick_positions(candidates.size(), static_cast<std::size_t>(count), rng)) {
        const int line = candidates[pick];
        const std::size_t at = lx.src.lines.line_start(line);
        const std::string_view phrase = kCommentPhrases[bounded(rng, kCommentPhrases.size())];
        edits.push_back({at, at, leading_whitespace(lx.text_line(line)) + "// " +
                                     std::string(phrase) + "\n"});
    }
    result.comments_added += count;
    return apply_edits(text, std::move(edits));
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::string remove_comments(const std::string& text, double fraction, std::uint64_t seed,
                            MutationResult& result) {
    const Lexed lx(text);
    const auto& comments = lx.src.comments;
    const std::size_t count = fraction_count(fraction, comments.size());
    if (count == 0) return text;

    std::vector<std::size_t> order(comments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    shuffle(order, rng);

    const std::string_view all = text;
    const int line_count = lx.src.lines.line_count();
    std::vector<Edit> edits;
    for (std::size_t i = 0; i < count; ++i) {
        const lex::Comment& c = comments[order[i]];
        const std::size_t line_begin = lx.src.lines.line_start(c.first_line);
        const std::size_t line_end = c.last_line < line_count
                                         ? lx.src.lines.line_start(c.last_line + 1)
                                         : text.size();
        const std::size_t content_end =
            (line_end > c.span.end && all[line_end - 1] == '\n') ? line_end - 1 : line_end;
        const bool alone = blank(all.substr(line_begin, c.span.begin - line_begin)) &&
                           blank(all.substr(c.span.end, content_end - std::min(content_end, c.span.end)));
        if (alone) {
            edits.push_back({line_begin, line_end, ""});
        } else if (!c.block) {
            std::size_t from = c.span.begin;
            while (from > line_begin && (all[from - 1] == ' ' || all[from - 1] == '\t')) --from;
            edits.push_back({from, c.span.end, ""});
        } else {
            edits.push_back({c.span.begin, c.span.end, " "});
        }
    }
    result.comments_removed += static_cast<int>(count);
    return apply_edits(text, std::move(edits));
}

}  // namespace

std::string_view to_string(MutationKind kind) noexcept {
    switch (kind) {
        case MutationKind::VariableRename: return "VariableRename";
        case MutationKind::DeadCode: return "DeadCode";
        case MutationKind::CommentAdd: return "CommentAdd";
        case MutationKind::CommentRemove: return "CommentRemove";
        case MutationKind::Combined: return "Combined";
    }
    return "Combined";
}

std::string_view mutation_label(MutationKind kind) noexcept {
    switch (kind) {
        case MutationKind::VariableRename: return "Variable Rename";
        case MutationKind::DeadCode: return "Dead Code";
        case MutationKind::CommentAdd: return "Comment Add";
        case MutationKind::CommentRemove: return "Comment Remove";
        case MutationKind::Combined: return "Combined";
    }
    return "Combined";
}

std::optional<MutationKind> mutation_kind_from_string(std::string_view text) noexcept {
    for (const auto kind : {MutationKind::VariableRename, MutationKind::DeadCode,
                            MutationKind::CommentAdd, MutationKind::CommentRemove,
                            MutationKind::Combined}) {
        if (text == to_string(kind) || text == mutation_label(kind)) return kind;
    }
    return std::nullopt;
}

void MutationSpec::validate() const {
    auto fraction_ok = [](double f) { return std::isfinite(f) && f >= 0.0 && f <= 1.0; };
    if (!fraction_ok(rename_fraction) || !fraction_ok(comment_remove_fraction)) {
        throw Error(ErrorKind::InvalidConfig, "mutation fractions must be in [0, 1]");
    }
    if (dead_blocks < 0 || comments_added < 0) {
        throw Error(ErrorKind::InvalidConfig, "mutation counts must be >= 0");
    }
}

std::size_t fraction_count(double fraction, std::size_t count) {
    const double exact = fraction * static_cast<double>(count);
    return static_cast<std::size_t>(std::ceil(exact - 1e-9));
}

std::vector<std::string> renameable_identifiers(std::string_view source) {
    const auto units = parse_checked(source, "input does not parse");
    return collect_variables(Lexed(source), units);
}

MutationResult mutate(std::string_view source, const MutationSpec& spec) {
    spec.validate();
    parse_checked(source, "input does not parse");
    MutationResult result;
    std::string text(source);
    switch (spec.kind) {
        case MutationKind::VariableRename:
            text = rename_variables(text, spec.rename_fraction, spec.seed, result);
            break;
        case MutationKind::DeadCode:
            text = insert_dead_code(text, spec.dead_blocks, spec.seed, result);
            break;
        case MutationKind::CommentAdd:
            text = add_comments(text, spec.comments_added, spec.seed, result);
            break;
        case MutationKind::CommentRemove:
            text = remove_comments(text, spec.comment_remove_fraction, spec.seed, result);
            break;
        case MutationKind::Combined:
            text = rename_variables(text, spec.rename_fraction, sub_seed(spec.seed, 1), result);
            text = insert_dead_code(text, spec.dead_blocks, sub_seed(spec.seed, 2), result);
            text = add_comments(text, spec.comments_added, sub_seed(spec.seed, 3), result);
            text = remove_comments(text, spec.comment_remove_fraction, sub_seed(spec.seed, 4), result);
            break;
    }
    if (text == source) {
        result.nothing_to_mutate = true;
    } else {
        parse_checked(text, "mutant does not parse");
    }
    result.text = std::move(text);
    return result;
}

std::string reconstruct_source(std::string_view assembled_text, std::string_view contract_name) {
    const auto lines = lex::split_lines(assembled_text);
    std::size_t i = 0;
    std::string head;
    while (i < lines.size()) {
        const std::string_view t = trim(lines[i]);
        if (!t.empty() && t.rfind("pragma", 0) != 0) break;
        if (!t.empty()) head += lines[i] + "\n";
        ++i;
    }
    std::string out = head;
    out += "contract " + std::string(contract_name.empty() ? "Reconstructed" : contract_name) + " {\n";
    for (; i < lines.size(); ++i) out += lines[i] + "\n";
    out += "}\n";
    return out;
}

}  // namespace solaudit
