#pragma once

#include "solaudit/llm.hpp"
#include "solaudit/slicer.hpp"
#include "solaudit/vector_kb.hpp"

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace solaudit {

enum class LayerId { Syntax, DesignPattern, Architecture };

std::string_view to_string(LayerId id) noexcept;
std::optional<LayerId> layer_from_string(std::string_view text) noexcept;

struct Layer {
    LayerId id;
    std::string_view title;
    std::string_view step_back_question;
    std::string_view focus;
};

// The three layers in verification order.
const std::array<Layer, 3>& layers() noexcept;
const Layer& layer(LayerId id) noexcept;

// Line numbers refer to the original source file.
struct CodeLocation {
    int start_line = 0;
    int end_line = 0;

    bool operator==(const CodeLocation&) const = default;
};

struct LayerFinding {
    LayerId layer = LayerId::Syntax;
    std::optional<std::string> swc_id;
    std::string title;
    double severity = 0.0;  // [0, 1]
    std::string reason;
    std::optional<CodeLocation> location;
    std::optional<std::string> suggestion;
    std::optional<std::string> category;

    bool operator==(const LayerFinding&) const = default;
};

struct LlmExchange {
    LayerId layer = LayerId::Syntax;
    std::string system_prompt;
    std::string user_prompt;
    std::string raw_response;
    std::vector<LayerFinding> parsed;
    std::vector<std::string> warnings;
    std::optional<std::string> error;
    std::string provider;
    std::chrono::nanoseconds duration{0};
};

// CVSS v3.1 base scores in [0, 10] keyed by SWC id.
struct SeverityTable {
    std::map<std::string, double> scores;
    double default_score = 5.0;

    // Table entry when swc_id is mapped; otherwise the claimed severity
    // (values above 1 read as CVSS and divided by 10); otherwise the default.
    // Result is in [0, 1].
    double resolve(const std::optional<std::string>& swc_id,
                   std::optional<double> claimed = std::nullopt) const;

    void validate() const;

    static SeverityTable defaults();
    // {"default": <score>, "scores": {"SWC-107": 8.8, ...}}
    static SeverityTable load(const std::filesystem::path& path);
    static SeverityTable from_json_text(const std::string& text);

    bool operator==(const SeverityTable&) const = default;
};

Prompt build_prompt(const Layer& layer, const ContextSlice& slice,
                    const std::vector<RetrievalHit>& retrieved);

struct ParsedFindings {
    std::vector<LayerFinding> findings;
    std::vector<std::string> warnings;
};

// Extracts the first bracket-balanced JSON array from `response`. Items that
// do not fit the finding grammar are dropped with a warning. Throws
// Error{MalformedResponse} when nothing parses from a response that is neither
// blank nor "[]".
ParsedFindings parse_findings(std::string_view response, LayerId layer,
                              const SeverityTable& table);

struct LayerRun {
    std::vector<LayerFinding> findings;
    LlmExchange exchange;
};

// Throws Error{ProviderUnavailable} or Error{MalformedResponse}.
LayerRun run_layer(const Layer& layer, const ContextSlice& slice,
                   const std::vector<RetrievalHit>& retrieved, const LlmProvider& provider,
                   const SeverityTable& table);

enum class Aggregation { Max, Mean };

double aggregate_layer_severity(const std::vector<LayerFinding>& findings, LayerId layer,
                                Aggregation aggregation = Aggregation::Max);

using LayerWeights = std::array<double, 3>;

// Mean of the three layer severities, or the weighted mean when weights are
// given. Throws Error{MissingLayer} or Error{InvalidConfig}.
double risk_score(const std::map<LayerId, double>& layer_severity,
                  const std::optional<LayerWeights>& weights = std::nullopt);

struct FunctionAudit {
    std::string function_name;
    int start_line = 0;
    int end_line = 0;
    std::vector<LayerFinding> findings;
    std::map<LayerId, double> layer_severity;
    double risk_score = 0.0;
    std::vector<RetrievalHit> retrieved;
    std::vector<LlmExchange> exchanges;
    // One entry per failed layer or retrieval step.
    std::vector<std::string> errors;
};

std::set<std::string> confirmed_swc_ids(const FunctionAudit& audit);

struct VerifierOptions {
    std::size_t top_k = 10;
    Threshold threshold{};
    Aggregation aggregation = Aggregation::Max;
    std::optional<LayerWeights> weights;
    SeverityTable severity = SeverityTable::defaults();
    // Upper bound on functions verified at once by verify_functions.
    std::size_t parallelism = 1;
};

// Top-k retrieval filtered by the threshold.
std::vector<RetrievalHit> retrieve(const VectorStore& kb, const EmbeddingVector& probe,
                                   std::size_t top_k, Threshold threshold);

// Runs the three layers in order with the given exemplars. A failing layer
// contributes severity 0 and an entry in `errors`.
FunctionAudit verify_with_hits(const ContextSlice& slice, std::vector<RetrievalHit> retrieved,
                               const LlmProvider& provider, const VerifierOptions& options);

// Embeds the slice, retrieves exemplars from `kb`, then verifies. An embedding
// failure is recorded in `errors` and verification proceeds without exemplars.
FunctionAudit verify_function(const ContextSlice& slice, const VectorStore& kb,
                              const EmbeddingProvider& embedder, const LlmProvider& provider,
                              const VerifierOptions& options);

// verify_function over many slices with at most `options.parallelism` in
// flight. Output order matches input order.
std::vector<FunctionAudit> verify_functions(const std::vector<ContextSlice>& slices,
                                            const VectorStore& kb,
                                            const EmbeddingProvider& embedder,
                                            const LlmProvider& provider,
                                            const VerifierOptions& options);

}  // namespace solaudit
