#pragma once

#include "solaudit/embedding.hpp"
#include "solaudit/slicer.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace solaudit {

// (a . b) / (|a| |b|), clamped to [-1, 1]. Throws DimensionMismatch or
// ZeroVector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct KnowledgeEntry {
    std::string entry_id;
    EmbeddingVector vector;
    std::string slice_text;
    SliceMetadata metadata;
    // Logical insertion clock of the owning store; orders ties.
    std::uint64_t inserted_at = 0;

    bool operator==(const KnowledgeEntry&) const = default;
};

struct RetrievalHit {
    std::shared_ptr<const KnowledgeEntry> entry;
    double similarity = 0.0;
    std::size_t rank = 0;
};

struct Threshold {
    double theta = 0.9;
};

enum class UpdateKind { Matched, Inserted, Clean };

struct UpdateOutcome {
    UpdateKind kind = UpdateKind::Clean;
    std::vector<RetrievalHit> matches;
    std::optional<std::string> inserted_id;
    std::set<std::string> confirmed_swc;
};

// Runs multi-layer verification for a slice and returns the confirmed SWC ids.
using VerifierCallback = std::function<std::set<std::string>(const ContextSlice&)>;

// Exact linear-scan vector store. Readers share, writers are exclusive.
class VectorStore {
public:
    explicit VectorStore(std::size_t dim);

    VectorStore(const VectorStore& other);
    VectorStore& operator=(const VectorStore& other);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const;
    bool contains(const std::string& entry_id) const;
    std::vector<std::shared_ptr<const KnowledgeEntry>> entries() const;

    // Assigns `inserted_at` from the store clock. Throws DuplicateId or
    // DimensionMismatch and leaves the store unchanged.
    void insert(KnowledgeEntry entry);

    // Hits sorted by similarity desc, then inserted_at asc, then entry_id.
    // An empty store yields an empty list.
    std::vector<RetrievalHit> query_top_k(const EmbeddingVector& probe, std::size_t k) const;
    // Every entry with similarity strictly greater than theta.
    std::vector<RetrievalHit> query_threshold(const EmbeddingVector& probe,
                                              Threshold threshold) const;

    // Match-or-verify-then-insert, atomically with respect to other writers.
    UpdateOutcome dynamic_update(const ContextSlice& slice, const EmbeddingVector& probe,
                                 Threshold threshold, const VerifierCallback& verifier);

    void save(const std::filesystem::path& path) const;
    static VectorStore load(const std::filesystem::path& path);

    bool operator==(const VectorStore& other) const;

private:
    std::vector<RetrievalHit> ranked(const EmbeddingVector& probe) const;
    void insert_locked(KnowledgeEntry entry);

    std::size_t dim_;
    std::uint64_t clock_ = 0;
    std::vector<std::shared_ptr<const KnowledgeEntry>> entries_;
    std::set<std::string> ids_;
    mutable std::shared_mutex mutex_;
};

// Stable identifier for a slice: <file>::<contract>::<function>@L<line>.
std::string entry_id_for(const ContextSlice& slice);

}  // namespace solaudit
