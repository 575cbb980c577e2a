#pragma once

#include "solaudit/source.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace solaudit {

// Same-contract call relationships, keyed by function name (overloads share
// a node).
struct CallGraph {
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;
    // Callees of each node in order of first call site; drives BFS order.
    std::map<std::string, std::vector<std::string>> callees;

    void add_node(const std::string& name) { nodes.insert(name); }

    void add_edge(const std::string& from, const std::string& to) {
        nodes.insert(from);
        nodes.insert(to);
        if (edges.emplace(from, to).second) callees[from].push_back(to);
    }

    bool has_edge(const std::string& from, const std::string& to) const {
        return edges.count({from, to}) != 0;
    }
};

struct DepthBound {
    int d_max = 3;
};

struct SliceMetadata {
    std::string source_file;
    std::string contract_name;
    std::set<std::string> swc_types;
    std::vector<std::string> called_functions;
    std::vector<std::string> referenced_state_vars;
    std::vector<std::string> triggered_events;

    bool operator==(const SliceMetadata&) const = default;
};

struct ContextSlice {
    FunctionUnit main_function;
    std::vector<std::string> pragmas;
    std::vector<StateVarDecl> relevant_state_vars;
    std::vector<EventDecl> relevant_events;
    std::vector<FunctionUnit> dependency_functions;
    std::string assembled_text;
    SliceMetadata metadata;

    bool operator==(const ContextSlice&) const = default;
};

CallGraph build_call_graph(const SourceUnit& unit);

// Functions reachable from `root` within `bound.d_max` hops, breadth-first,
// root excluded, each name once at its shallowest depth.
std::vector<std::string> dependency_closure(const CallGraph& graph, const std::string& root,
                                            DepthBound bound);

ContextSlice assemble_slice(const SourceUnit& unit, const std::string& target, DepthBound bound);
ContextSlice assemble_slice_at(const SourceUnit& unit, std::size_t function_index,
                               DepthBound bound);

std::vector<ContextSlice> build_corpus(const std::vector<SourceUnit>& units, DepthBound bound,
                                       bool filter_annotated);

// JSON-Lines corpus format: one serialized ContextSlice per line.
std::string slice_to_json_line(const ContextSlice& slice);
ContextSlice slice_from_json_line(const std::string& line);
void write_corpus(std::ostream& out, const std::vector<ContextSlice>& slices);
std::vector<ContextSlice> read_corpus(std::istream& in);

}  // namespace solaudit
