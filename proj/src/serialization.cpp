#include "solaudit/serialization.hpp"

#include "solaudit/error.hpp"

namespace solaudit {

namespace {

std::vector<std::string> string_list(const Json& j) {
    std::vector<std::string> out;
    for (const auto& item : j) out.push_back(item.get<std::string>());
    return out;
}

}  // namespace

Json to_json(const FunctionUnit& fn) {
    Json j;
    j["name"] = fn.name;
    j["kind"] = to_string(fn.kind);
    j["visibility"] = to_string(fn.visibility);
    j["start_line"] = fn.start_line;
    j["end_line"] = fn.end_line;
    j["body_text"] = fn.body_text;
    j["doc_comment"] = fn.doc_comment ? Json(*fn.doc_comment) : Json(nullptr);
    j["swc_tags"] = fn.swc_tags;
    return j;
}

Json to_json(const StateVarDecl& var) {
    return Json{{"name", var.name},
                {"declared_type", var.declared_type},
                {"decl_line", var.decl_line},
                {"full_text", var.full_text}};
}

Json to_json(const EventDecl& ev) {
    return Json{{"name", ev.name}, {"decl_line", ev.decl_line}, {"full_text", ev.full_text}};
}

Json to_json(const SliceMetadata& meta) {
    return Json{{"source_file", meta.source_file},
                {"contract_name", meta.contract_name},
                {"swc_types", meta.swc_types},
                {"called_functions", meta.called_functions},
                {"referenced_state_vars", meta.referenced_state_vars},
                {"triggered_events", meta.triggered_events}};
}

Json to_json(const ContextSlice& slice) {
    Json j;
    j["main_function"] = to_json(slice.main_function);
    j["pragmas"] = slice.pragmas;
    j["relevant_state_vars"] = Json::array();
    for (const auto& v : slice.relevant_state_vars) j["relevant_state_vars"].push_back(to_json(v));
    j["relevant_events"] = Json::array();
    for (const auto& e : slice.relevant_events) j["relevant_events"].push_back(to_json(e));
    j["dependency_functions"] = Json::array();
    for (const auto& f : slice.dependency_functions) j["dependency_functions"].push_back(to_json(f));
    j["assembled_text"] = slice.assembled_text;
    j["metadata"] = to_json(slice.metadata);
    return j;
}

FunctionUnit function_from_json(const Json& j) {
    FunctionUnit fn;
    fn.name = j.at("name").get<std::string>();
    const auto kind = function_kind_from_string(j.at("kind").get<std::string>());
    const auto vis = visibility_from_string(j.at("visibility").get<std::string>());
    if (!kind || !vis) throw Error(ErrorKind::ParseFailure, "bad function kind or visibility");
    fn.kind = *kind;
    fn.visibility = *vis;
    fn.start_line = j.at("start_line").get<int>();
    fn.end_line = j.at("end_line").get<int>();
    fn.body_text = j.at("body_text").get<std::string>();
    if (j.contains("doc_comment") && !j["doc_comment"].is_null()) {
        fn.doc_comment = j["doc_comment"].get<std::string>();
    }
    for (const auto& tag : j.at("swc_tags")) fn.swc_tags.insert(tag.get<std::string>());
    return fn;
}

StateVarDecl state_var_from_json(const Json& j) {
    return StateVarDecl{j.at("name").get<std::string>(), j.at("declared_type").get<std::string>(),
                        j.at("decl_line").get<int>(), j.at("full_text").get<std::string>()};
}

EventDecl event_from_json(const Json& j) {
    return EventDecl{j.at("name").get<std::string>(), j.at("decl_line").get<int>(),
                     j.at("full_text").get<std::string>()};
}

SliceMetadata metadata_from_json(const Json& j) {
    SliceMetadata meta;
    meta.source_file = j.at("source_file").get<std::string>();
    meta.contract_name = j.at("contract_name").get<std::string>();
    for (const auto& tag : j.at("swc_types")) meta.swc_types.insert(tag.get<std::string>());
    meta.called_functions = string_list(j.at("called_functions"));
    meta.referenced_state_vars = string_list(j.at("referenced_state_vars"));
    meta.triggered_events = string_list(j.at("triggered_events"));
    return meta;
}

ContextSlice slice_from_json(const Json& j) {
    ContextSlice slice;
    slice.main_function = function_from_json(j.at("main_function"));
    slice.pragmas = string_list(j.at("pragmas"));
    for (const auto& v : j.at("relevant_state_vars")) {
        slice.relevant_state_vars.push_back(state_var_from_json(v));
    }
    for (const auto& e : j.at("relevant_events")) slice.relevant_events.push_back(event_from_json(e));
    for (const auto& f : j.at("dependency_functions")) {
        slice.dependency_functions.push_back(function_from_json(f));
    }
    slice.assembled_text = j.at("assembled_text").get<std::string>();
    slice.metadata = metadata_from_json(j.at("metadata"));
    return slice;
}

}  // namespace solaudit
