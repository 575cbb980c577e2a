#include "solaudit/reporting.hpp"

#include "solaudit/error.hpp"
#include "solaudit/serialization.hpp"

#include <algorithm>
#include <ctime>

namespace solaudit {

namespace {

const std::map<std::string, std::string>& remediation_table() {
    static const std::map<std::string, std::string> table{
        {"SWC-100", "Declare an explicit visibility for every function."},
        {"SWC-101", "Use checked arithmetic (Solidity >= 0.8 or a SafeMath library) and validate operand ranges."},
        {"SWC-102", "Compile with a recent, maintained compiler release."},
        {"SWC-103", "Pin the pragma to the exact compiler version used for testing and deployment."},
        {"SWC-104", "Check the return value of every low-level call and handle failure."},
        {"SWC-105", "Restrict withdrawals of Ether to authorized callers."},
        {"SWC-106", "Guard selfdestruct behind strict access control or remove it."},
        {"SWC-107", "Apply checks-effects-interactions and add a reentrancy guard around external calls."},
        {"SWC-108", "Declare an explicit visibility for every state variable."},
        {"SWC-109", "Initialize storage pointers explicitly or use memory for local structs and arrays."},
        {"SWC-110", "Use require for input validation and keep assert for invariants only."},
        {"SWC-111", "Replace deprecated constructs with their current equivalents."},
        {"SWC-112", "Only delegatecall into trusted, fixed targets and restrict who can choose the callee."},
        {"SWC-113", "Isolate external calls so one failing call cannot block others; prefer pull payments."},
        {"SWC-114", "Avoid logic that depends on transaction ordering or add commit-reveal protection."},
        {"SWC-115", "Authorize with msg.sender instead of tx.origin."},
        {"SWC-116", "Do not rely on block timestamps or numbers for critical decisions or randomness."},
        {"SWC-117", "Include a nonce and the contract address in signed messages and use a vetted ECDSA library."},
        {"SWC-118", "Declare constructors with the constructor keyword."},
        {"SWC-119", "Rename variables that shadow inherited or outer-scope declarations."},
        {"SWC-120", "Use a verifiable randomness source instead of chain attributes."},
        {"SWC-121", "Bind signatures to a nonce to prevent replay."},
        {"SWC-122", "Verify the signer of every message before acting on it."},
        {"SWC-123", "Validate requirements on inputs supplied to called contracts."},
        {"SWC-124", "Validate every index and key that selects a storage slot to write."},
        {"SWC-125", "Order base contracts from most general to most derived."},
        {"SWC-126", "Forward enough gas to sub-calls or check remaining gas explicitly."},
        {"SWC-127", "Do not let callers control the target of jumps through function-type variables."},
        {"SWC-128", "Bound loops over dynamic data or process them in batches."},
        {"SWC-129", "Fix typos in operators such as =+ and =-."},
        {"SWC-130", "Strip right-to-left override characters from source files."},
        {"SWC-131", "Remove unused variables."},
        {"SWC-132", "Do not assume an exact Ether balance; track deposits explicitly."},
        {"SWC-133", "Use abi.encode instead of abi.encodePacked for hashes over several dynamic values."},
        {"SWC-134", "Avoid hardcoded gas amounts on calls and transfers."},
        {"SWC-135", "Remove statements that have no effect or fix the intended operation."},
        {"SWC-136", "Do not store secrets on-chain; all storage is publicly readable."},
    };
    return table;
}

std::string slice_lines(const std::vector<std::string>& raw_lines, int start, int end) {
    std::string out;
    for (int line = start; line <= end; ++line) {
        if (line > start) out += '\n';
        out += raw_lines[static_cast<std::size_t>(line - 1)];
    }
    return out;
}

Json to_json(const ReportItem& item) {
    Json j;
    j["ID"] = item.id;
    j["Title"] = item.title;
    j["Type"] = item.type;
    j["CodeBlock"] = item.code_block;
    j["Location"] = Json{{"file", item.location.file},
                         {"start_line", item.location.start_line},
                         {"end_line", item.location.end_line}};
    j["RiskScore"] = item.risk_score;
    j["Reason"] = item.reason;
    j["Suggestions"] = item.suggestions;
    return j;
}

Json to_json(const FunctionSummary& summary) {
    Json j;
    j["function"] = summary.function;
    j["start_line"] = summary.start_line;
    j["end_line"] = summary.end_line;
    j["risk_score"] = summary.risk_score;
    Json layers = Json::object();
    for (const auto& [id, severity] : summary.layer_severity) layers[std::string(to_string(id))] = severity;
    j["layer_severity"] = layers;
    j["finding_count"] = summary.finding_count;
    j["errors"] = summary.errors;
    return j;
}

ReportItem item_from_json(const Json& j) {
    ReportItem item;
    item.id = j.at("ID").get<std::string>();
    item.title = j.at("Title").get<std::string>();
    item.type = j.at("Type").get<std::string>();
    item.code_block = j.at("CodeBlock").get<std::string>();
    const Json& loc = j.at("Location");
    item.location = {loc.at("file").get<std::string>(), loc.at("start_line").get<int>(),
                     loc.at("end_line").get<int>()};
    item.risk_score = j.at("RiskScore").get<double>();
    item.reason = j.at("Reason").get<std::string>();
    item.suggestions = j.at("Suggestions").get<std::string>();
    return item;
}

FunctionSummary summary_from_json(const Json& j) {
    FunctionSummary s;
    s.function = j.at("function").get<std::string>();
    s.start_line = j.at("start_line").get<int>();
    s.end_line = j.at("end_line").get<int>();
    s.risk_score = j.at("risk_score").get<double>();
    for (const auto& [name, severity] : j.at("layer_severity").items()) {
        const auto id = layer_from_string(name);
        if (!id) throw Error(ErrorKind::ParseFailure, "unknown layer " + name);
        s.layer_severity[*id] = severity.get<double>();
    }
    s.finding_count = j.at("finding_count").get<std::size_t>();
    s.errors = j.at("errors").get<std::vector<std::string>>();
    return s;
}

}  // namespace

std::string remediation_for(const std::optional<std::string>& swc_id) {
    if (swc_id) {
        const auto& table = remediation_table();
        if (const auto it = table.find(*swc_id); it != table.end()) return it->second;
    }
    return "Review the flagged code against Solidity best practices and refactor it.";
}

std::string function_key(const ContextSlice& slice, bool disambiguate) {
    std::string key = slice.metadata.contract_name + "." + slice.main_function.name;
    if (disambiguate) key += "@L" + std::to_string(slice.main_function.start_line);
    return key;
}

std::vector<ReportItem> render_function_report(const FunctionAudit& audit,
                                               const ContextSlice& slice,
                                               const std::vector<std::string>& raw_lines,
                                               bool disambiguate) {
    std::vector<ReportItem> items;
    const std::string key = function_key(slice, disambiguate);
    const auto& fn = slice.main_function;
    const int line_count = static_cast<int>(raw_lines.size());
    for (const auto& finding : audit.findings) {
        ReportItem item;
        item.id = key + "." + std::to_string(items.size() + 1);
        item.title = finding.title;
        item.type = finding.swc_id ? *finding.swc_id : finding.category.value_or("Code Quality");
        item.location.file = slice.metadata.source_file;
        const auto& loc = finding.location;
        if (loc && loc->start_line >= 1 && loc->end_line >= loc->start_line &&
            loc->end_line <= line_count) {
            item.code_block = slice_lines(raw_lines, loc->start_line, loc->end_line);
            item.location.start_line = loc->start_line;
            item.location.end_line = loc->end_line;
        } else {
            item.code_block = fn.body_text;
            item.location.start_line = fn.start_line;
            item.location.end_line = fn.end_line;
        }
        item.risk_score = audit.risk_score;
        item.reason = finding.reason;
        item.suggestions = finding.suggestion && !finding.suggestion->empty()
                               ? *finding.suggestion
                               : remediation_for(finding.swc_id);
        items.push_back(std::move(item));
    }
    return items;
}

FunctionSummary summarize(const FunctionAudit& audit, const ContextSlice& slice,
                          bool disambiguate) {
    FunctionSummary s;
    s.function = function_key(slice, disambiguate);
    s.start_line = audit.start_line;
    s.end_line = audit.end_line;
    s.risk_score = audit.risk_score;
    s.layer_severity = audit.layer_severity;
    s.finding_count = audit.findings.size();
    s.errors = audit.errors;
    return s;
}

ContractReport aggregate_reports(const std::vector<std::vector<ReportItem>>& function_reports,
                                 std::vector<FunctionSummary> summaries, const ReportMeta& meta) {
    ContractReport report;
    report.contract_name = meta.contract_name;
    report.source_file = meta.source_file;
    report.generated_at = meta.generated_at;
    for (const auto& items : function_reports) {
        report.items.insert(report.items.end(), items.begin(), items.end());
    }
    std::stable_sort(report.items.begin(), report.items.end(),
                     [](const ReportItem& a, const ReportItem& b) {
                         if (a.risk_score != b.risk_score) return a.risk_score > b.risk_score;
                         return a.id < b.id;
                     });
    for (const auto& item : report.items) report.max_risk = std::max(report.max_risk, item.risk_score);
    report.function_audits = std::move(summaries);
    return report;
}

std::string emit_json(const ContractReport& report) {
    Json j;
    j["contract_name"] = report.contract_name;
    j["source_file"] = report.source_file;
    j["generated_at"] = report.generated_at;
    j["max_risk"] = report.max_risk;
    Json items = Json::array();
    for (const auto& item : report.items) items.push_back(to_json(item));
    j["items"] = std::move(items);
    Json audits = Json::array();
    for (const auto& s : report.function_audits) audits.push_back(to_json(s));
    j["function_audits"] = std::move(audits);
    return j.dump(2) + "\n";
}

ContractReport parse_report(const std::string& text) {
    try {
        const Json j = Json::parse(text);
        ContractReport report;
        report.contract_name = j.at("contract_name").get<std::string>();
        report.source_file = j.at("source_file").get<std::string>();
        report.generated_at = j.at("generated_at").get<std::string>();
        report.max_risk = j.at("max_risk").get<double>();
        for (const auto& item : j.at("items")) report.items.push_back(item_from_json(item));
        for (const auto& s : j.at("function_audits")) {
            report.function_audits.push_back(summary_from_json(s));
        }
        return report;
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ParseFailure, std::string("bad report: ") + e.what());
    }
}

std::string format_utc_timestamp(std::int64_t epoch_seconds) {
    const auto t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

}  // namespace solaudit
