#pragma once

#include "solaudit/verifier.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace solaudit {

struct ReportLocation {
    std::string file;
    int start_line = 0;
    int end_line = 0;

    bool operator==(const ReportLocation&) const = default;
};

// Serialized with keys ID, Title, Type, CodeBlock, Location, RiskScore,
// Reason, Suggestions in that order.
struct ReportItem {
    std::string id;
    std::string title;
    std::string type;
    std::string code_block;
    ReportLocation location;
    double risk_score = 0.0;
    std::string reason;
    std::string suggestions;

    bool operator==(const ReportItem&) const = default;
};

struct FunctionSummary {
    std::string function;
    int start_line = 0;
    int end_line = 0;
    double risk_score = 0.0;
    std::map<LayerId, double> layer_severity;
    std::size_t finding_count = 0;
    std::vector<std::string> errors;

    bool operator==(const FunctionSummary&) const = default;
};

struct ContractReport {
    std::string contract_name;
    std::string source_file;
    std::string generated_at;
    std::vector<ReportItem> items;
    std::vector<FunctionSummary> function_audits;
    double max_risk = 0.0;

    bool operator==(const ContractReport&) const = default;
};

// Remediation line used when a finding carries no suggestion.
std::string remediation_for(const std::optional<std::string>& swc_id);

// "<contract>.<function>", with "@L<start_line>" appended when `disambiguate`
// is set (overloaded names).
std::string function_key(const ContextSlice& slice, bool disambiguate);

// One item per finding, IDs "<function_key>.<n>" with n from 1. CodeBlock is
// the finding's lines from `raw_lines` when its location is valid, otherwise
// the main function body.
std::vector<ReportItem> render_function_report(const FunctionAudit& audit,
                                               const ContextSlice& slice,
                                               const std::vector<std::string>& raw_lines,
                                               bool disambiguate = false);

FunctionSummary summarize(const FunctionAudit& audit, const ContextSlice& slice,
                          bool disambiguate = false);

struct ReportMeta {
    std::string contract_name;
    std::string source_file;
    std::string generated_at;
};

// Concatenates items, sorts by RiskScore desc then ID, and sets max_risk.
ContractReport aggregate_reports(const std::vector<std::vector<ReportItem>>& function_reports,
                                 std::vector<FunctionSummary> summaries, const ReportMeta& meta);

// Canonical form: fixed key order, two-space indent, trailing newline.
std::string emit_json(const ContractReport& report);
// Throws Error{ParseFailure}.
ContractReport parse_report(const std::string& text);

// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc_timestamp(std::int64_t epoch_seconds);

}  // namespace solaudit
