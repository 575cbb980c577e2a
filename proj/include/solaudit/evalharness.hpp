#pragma once

#include "solaudit/embedding.hpp"
#include "solaudit/slicer.hpp"
#include "solaudit/vector_kb.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace solaudit {

enum class MutationKind { VariableRename, DeadCode, CommentAdd, CommentRemove, Combined };

std::string_view to_string(MutationKind kind) noexcept;
// Accepts the enum spelling ("DeadCode") or the table label ("Dead Code").
std::optional<MutationKind> mutation_kind_from_string(std::string_view text) noexcept;
// Row label used in result tables, e.g. "Variable Rename".
std::string_view mutation_label(MutationKind kind) noexcept;

struct MutationSpec {
    MutationKind kind = MutationKind::Combined;
    double rename_fraction = 0.7;
    int dead_blocks = 3;
    int comments_added = 5;
    double comment_remove_fraction = 0.8;
    std::uint64_t seed = 0;

    // Throws Error{InvalidConfig}.
    void validate() const;

    bool operator==(const MutationSpec&) const = default;
};

// Inserted verbatim, once per dead block.
inline constexpr std::string_view kDeadCodeTemplate = "if (false) { revert(\"unreachable\"); }";

struct MutationResult {
    std::string text;
    // Set when the mutation had nothing to act on; `text` is then the input.
    bool nothing_to_mutate = false;
    std::map<std::string, std::string> renames;
    int dead_blocks_inserted = 0;
    int comments_added = 0;
    int comments_removed = 0;
};

// ceil(fraction * count), robust to representation error in the product.
std::size_t fraction_count(double fraction, std::size_t count);

// Variables eligible for renaming: state variables, parameters and local
// declarations, excluding function, modifier, event and type names. Sorted.
std::vector<std::string> renameable_identifiers(std::string_view source);

// Throws Error{ParseFailure} when the input does not parse.
MutationResult mutate(std::string_view source, const MutationSpec& spec);

// Wraps a slice's assembled text back into a compilable-looking contract:
// leading pragma lines, then `contract <name> {`, the remaining text and `}`.
// Re-slicing function 0 of the result reproduces the slice.
std::string reconstruct_source(std::string_view assembled_text, std::string_view contract_name);

struct EvalSample {
    std::string entry_id;
    std::string text;
    std::string contract_name;
    std::string source_file;
};

std::vector<EvalSample> samples_from_kb(const VectorStore& kb);

struct RetrievalMetrics {
    std::map<int, double> recall_at;  // k -> percentage
    double mrr = 0.0;
    std::optional<double> retention_rate;  // percentage
    std::size_t n_samples = 0;
};

inline const std::vector<int> kDefaultRecallKs{1, 3, 5, 10};

// Ranks are 1-based; nullopt marks a miss. Empty input yields zeros.
RetrievalMetrics compute_retrieval_metrics(const std::vector<std::optional<std::size_t>>& ranks,
                                           const std::vector<int>& ks = kDefaultRecallKs);

// 1-based position of `entry_id` in `hits`.
std::optional<std::size_t> rank_of(const std::vector<RetrievalHit>& hits,
                                   const std::string& entry_id);

struct Probe {
    std::string original_id;
    EmbeddingVector vector;
};

// Mutates, re-slices and embeds one sample. The per-sample seed is derived
// from spec.seed and the entry id, so results do not depend on sample order.
Probe make_probe(const EvalSample& sample, const MutationSpec& spec,
                 const EmbeddingProvider& embedder, DepthBound bound);

struct RobustnessRow {
    MutationSpec spec;
    RetrievalMetrics metrics;
    std::size_t failed = 0;
};

// Samples whose mutation, slicing or embedding fails are excluded from n and
// counted in `failed`.
std::vector<RobustnessRow> robustness_eval(const VectorStore& kb,
                                           const std::vector<EvalSample>& samples,
                                           const std::vector<MutationSpec>& specs,
                                           std::size_t k_max, const EmbeddingProvider& embedder,
                                           DepthBound bound = {}, std::size_t parallelism = 1);

inline const std::vector<double> kDefaultThetas{0.70, 0.80, 0.85, 0.90, 0.95};

struct ThresholdRow {
    double theta = 0.0;
    RetrievalMetrics metrics;  // retention_rate is set
};

// For each theta, hits are the top k_max filtered by similarity > theta.
// Retention is the share of probes keeping at least one hit.
std::vector<ThresholdRow> threshold_sweep(const VectorStore& kb, const std::vector<Probe>& probes,
                                          const std::vector<double>& thetas,
                                          std::size_t k_max = 10);

struct Prediction {
    bool predicted = false;
    bool actual = false;
};

struct ClassificationMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    // Percentages; nullopt when a denominator is zero.
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

// Throws Error{EmptyInput}.
ClassificationMetrics classification_metrics(const std::vector<Prediction>& predictions);

}  // namespace solaudit
