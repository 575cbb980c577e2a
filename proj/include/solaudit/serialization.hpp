#pragma once

// JSON mappings for the shared domain types. Key order is fixed by
// ordered_json so that every serialized form is canonical.

#include "solaudit/slicer.hpp"
#include "solaudit/source.hpp"

#include <json.hpp>

namespace solaudit {

using Json = nlohmann::ordered_json;

Json to_json(const FunctionUnit& fn);
Json to_json(const StateVarDecl& var);
Json to_json(const EventDecl& ev);
Json to_json(const SliceMetadata& meta);
Json to_json(const ContextSlice& slice);

FunctionUnit function_from_json(const Json& j);
StateVarDecl state_var_from_json(const Json& j);
EventDecl event_from_json(const Json& j);
SliceMetadata metadata_from_json(const Json& j);
ContextSlice slice_from_json(const Json& j);

}  // namespace solaudit
