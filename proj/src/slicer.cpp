#include "solaudit/slicer.hpp"

#include "solaudit/error.hpp"
#include "solaudit/lexer.hpp"
#include "solaudit/serialization.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

namespace solaudit {

namespace {

struct LexedBody {
    lex::LexedSource lexed;
    std::vector<lex::Token> tokens;

    explicit LexedBody(std::string_view text) : lexed(lex::lex_source(text)) {
        tokens = lex::tokenize(lexed.code, lexed.lines);
    }

    std::string_view text(std::size_t i) const { return lex::token_text(lexed.code, tokens[i]); }
};

// Index of the first token after the declared name.
std::size_t header_start(const FunctionUnit& fn, const LexedBody& body) {
    const bool named = fn.kind == FunctionKind::Modifier ||
                       (fn.kind != FunctionKind::Fallback && body.tokens.size() > 1 &&
                        body.text(0) == "function");
    return named ? 2 : 1;
}

std::vector<std::string> callees_of(const FunctionUnit& fn, const std::set<std::string>& nodes,
                                    const std::set<std::string>& modifiers,
                                    const std::unordered_set<std::string>& type_names) {
    const LexedBody body(fn.body_text);
    std::vector<std::string> out;
    auto add = [&](std::string_view name) {
        std::string callee(name);
        if (std::find(out.begin(), out.end(), callee) == out.end()) out.push_back(std::move(callee));
    };

    bool in_header = true;
    int paren_depth = 0;
    for (std::size_t i = header_start(fn, body); i < body.tokens.size(); ++i) {
        const std::string_view t = body.text(i);
        if (in_header) {
            if (t == "(") ++paren_depth;
            if (t == ")") --paren_depth;
            if (t == "{" && paren_depth == 0) in_header = false;
        }
        if (body.tokens[i].kind != lex::TokenKind::Identifier) continue;
        const std::string name(t);
        if (nodes.count(name) == 0 || lex::is_keyword(name) || type_names.count(name) != 0) continue;
        if (i > 0) {
            const std::string_view prev = body.text(i - 1);
            if (prev == "." || prev == "emit" || prev == "new") continue;
        }
        const bool is_call = i + 1 < body.tokens.size() && body.text(i + 1) == "(";
        const bool modifier_use = in_header && paren_depth == 0 && modifiers.count(name) != 0;
        if (is_call || modifier_use) add(name);
    }
    return out;
}

std::set<std::string> identifiers_in(const std::string& text) {
    const LexedBody body(text);
    std::set<std::string> out;
    for (std::size_t i = 0; i < body.tokens.size(); ++i) {
        if (body.tokens[i].kind == lex::TokenKind::Identifier) out.emplace(body.text(i));
    }
    return out;
}

std::set<std::string> emitted_events(const std::string& text) {
    const LexedBody body(text);
    std::set<std::string> out;
    for (std::size_t i = 0; i + 1 < body.tokens.size(); ++i) {
        if (body.text(i) == "emit" && body.tokens[i + 1].kind == lex::TokenKind::Identifier) {
            out.emplace(body.text(i + 1));
        }
    }
    return out;
}

ContextSlice assemble(const SourceUnit& unit, const CallGraph& graph, std::size_t index,
                      DepthBound bound) {
    ContextSlice slice;
    slice.main_function = unit.functions[index];
    slice.pragmas = unit.pragmas;

    const auto dep_names = dependency_closure(graph, slice.main_function.name, bound);
    for (const auto& name : dep_names) {
        for (std::size_t k = 0; k < unit.functions.size(); ++k) {
            if (k != index && unit.functions[k].name == name) {
                slice.dependency_functions.push_back(unit.functions[k]);
            }
        }
    }

    std::set<std::string> idents = identifiers_in(slice.main_function.body_text);
    std::set<std::string> emitted = emitted_events(slice.main_function.body_text);
    for (const auto& dep : slice.dependency_functions) {
        idents.merge(identifiers_in(dep.body_text));
        emitted.merge(emitted_events(dep.body_text));
    }
    for (const auto& var : unit.state_vars) {
        if (idents.count(var.name) != 0) slice.relevant_state_vars.push_back(var);
    }
    for (const auto& ev : unit.events) {
        if (emitted.count(ev.name) != 0) slice.relevant_events.push_back(ev);
    }

    auto join = [](const auto& items, auto&& field) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out.push_back('\n');
            out += field(item);
        }
        return out;
    };
    std::vector<std::string> sections;
    sections.push_back(join(slice.pragmas, [](const std::string& p) { return p; }));
    sections.push_back(
        join(slice.relevant_state_vars, [](const StateVarDecl& v) { return v.full_text; }));
    sections.push_back(join(slice.relevant_events, [](const EventDecl& e) { return e.full_text; }));
    sections.push_back(slice.main_function.body_text);
    for (const auto& dep : slice.dependency_functions) sections.push_back(dep.body_text);
    for (const auto& section : sections) {
        if (section.empty()) continue;
        if (!slice.assembled_text.empty()) slice.assembled_text += "\n\n";
        slice.assembled_text += section;
    }

    auto& meta = slice.metadata;
    meta.source_file = unit.file_name;
    meta.contract_name = unit.contract_name;
    meta.swc_types = slice.main_function.swc_tags;
    for (const auto& dep : slice.dependency_functions) {
        meta.swc_types.insert(dep.swc_tags.begin(), dep.swc_tags.end());
        meta.called_functions.push_back(dep.name);
    }
    for (const auto& var : slice.relevant_state_vars) meta.referenced_state_vars.push_back(var.name);
    for (const auto& ev : slice.relevant_events) meta.triggered_events.push_back(ev.name);
    return slice;
}

}  // namespace

CallGraph build_call_graph(const SourceUnit& unit) {
    CallGraph graph;
    std::set<std::string> modifiers;
    for (const auto& fn : unit.functions) {
        graph.nodes.insert(fn.name);
        if (fn.kind == FunctionKind::Modifier) modifiers.insert(fn.name);
    }
    const std::unordered_set<std::string> type_names(unit.type_names.begin(),
                                                     unit.type_names.end());
    for (const auto& fn : unit.functions) {
        auto& list = graph.callees[fn.name];
        for (auto& callee : callees_of(fn, graph.nodes, modifiers, type_names)) {
            if (graph.edges.emplace(fn.name, callee).second) list.push_back(std::move(callee));
        }
    }
    return graph;
}

std::vector<std::string> dependency_closure(const CallGraph& graph, const std::string& root,
                                            DepthBound bound) {
    if (graph.nodes.count(root) == 0) {
        throw Error(ErrorKind::UnknownRoot, "'" + root + "' is not a node of the call graph");
    }
    std::vector<std::string> out;
    std::set<std::string> seen{root};
    std::vector<std::string> frontier{root};
    for (int depth = 0; depth < bound.d_max && !frontier.empty(); ++depth) {
        std::vector<std::string> next;
        for (const auto& node : frontier) {
            const auto it = graph.callees.find(node);
            if (it == graph.callees.end()) continue;
            for (const auto& callee : it->second) {
                if (seen.insert(callee).second) {
                    out.push_back(callee);
                    next.push_back(callee);
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

ContextSlice assemble_slice_at(const SourceUnit& unit, std::size_t function_index,
                               DepthBound bound) {
    if (function_index >= unit.functions.size()) {
        throw Error(ErrorKind::UnknownFunction,
                    "function index " + std::to_string(function_index) + " out of range");
    }
    return assemble(unit, build_call_graph(unit), function_index, bound);
}

ContextSlice assemble_slice(const SourceUnit& unit, const std::string& target, DepthBound bound) {
    for (std::size_t i = 0; i < unit.functions.size(); ++i) {
        if (unit.functions[i].name == target) return assemble_slice_at(unit, i, bound);
    }
    throw Error(ErrorKind::UnknownFunction,
                "no function '" + target + "' in contract " + unit.contract_name);
}

std::vector<ContextSlice> build_corpus(const std::vector<SourceUnit>& units, DepthBound bound,
                                       bool filter_annotated) {
    std::vector<ContextSlice> out;
    for (const auto& unit : units) {
        const CallGraph graph = build_call_graph(unit);
        for (std::size_t i = 0; i < unit.functions.size(); ++i) {
            if (filter_annotated && unit.functions[i].swc_tags.empty()) continue;
            out.push_back(assemble(unit, graph, i, bound));
        }
    }
    return out;
}

std::string slice_to_json_line(const ContextSlice& slice) {
    return to_json(slice).dump();
}

ContextSlice slice_from_json_line(const std::string& line) {
    try {
        return slice_from_json(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseFailure, std::string("corpus line: ") + e.what());
    }
}

void write_corpus(std::ostream& out, const std::vector<ContextSlice>& slices) {
    for (const auto& slice : slices) out << slice_to_json_line(slice) << '\n';
}

std::vector<ContextSlice> read_corpus(std::istream& in) {
    std::vector<ContextSlice> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(slice_from_json_line(line));
    }
    return out;
}

}  // namespace solaudit
