#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace solaudit {

enum class FunctionKind { Function, Constructor, Fallback, Receive, Modifier };
enum class Visibility { Public, External, Internal, Private, Unspecified };

std::string_view to_string(FunctionKind kind) noexcept;
std::string_view to_string(Visibility visibility) noexcept;
std::optional<FunctionKind> function_kind_from_string(std::string_view text) noexcept;
std::optional<Visibility> visibility_from_string(std::string_view text) noexcept;

struct FunctionUnit {
    std::string name;
    FunctionKind kind = FunctionKind::Function;
    Visibility visibility = Visibility::Unspecified;
    int start_line = 1;
    int end_line = 1;
    // Declaration keyword through the matching closing brace, verbatim.
    std::string body_text;
    std::optional<std::string> doc_comment;
    std::set<std::string> swc_tags;

    bool operator==(const FunctionUnit&) const = default;
};

struct StateVarDecl {
    std::string name;
    std::string declared_type;
    int decl_line = 1;
    std::string full_text;

    bool operator==(const StateVarDecl&) const = default;
};

struct EventDecl {
    std::string name;
    int decl_line = 1;
    std::string full_text;

    bool operator==(const EventDecl&) const = default;
};

struct SwcAnnotation {
    std::string swc_id;
    int start_line = 1;
    int end_line = 1;
    int comment_line = 1;

    bool operator==(const SwcAnnotation&) const = default;
};

struct SourceUnit {
    std::string file_name;
    std::string contract_name;
    std::string contract_kind;  // contract, abstract contract, library, interface
    std::string inheritance;    // text of the `is` clause, unresolved
    std::vector<std::string> pragmas;
    std::vector<StateVarDecl> state_vars;
    std::vector<EventDecl> events;
    std::vector<FunctionUnit> functions;
    // Contract, struct and enum names declared anywhere in the file.
    std::vector<std::string> type_names;
    std::vector<std::string> raw_lines;

    const FunctionUnit* find_function(std::string_view name) const;

    bool operator==(const SourceUnit&) const = default;
};

struct TagResult {
    SourceUnit unit;
    std::vector<SwcAnnotation> orphaned;
};

// Every contract, library and interface declared in the file, in source order.
// Throws Error{UnbalancedBraces} or Error{EmptySource}.
std::vector<SourceUnit> parse_all(std::string_view source, std::string_view file_name);

// The first contract in the file, or the one named `contract_filter`.
SourceUnit parse_source(std::string_view source, std::string_view file_name,
                        std::optional<std::string_view> contract_filter = std::nullopt);

// Comments of the form `// SWC-<id>: L<start>[-<end>]`, in source order.
std::vector<SwcAnnotation> extract_annotations(std::string_view source);

TagResult tag_functions(SourceUnit unit, const std::vector<SwcAnnotation>& annotations);

bool is_swc_id(std::string_view text);

}  // namespace solaudit
