#include "solaudit/vector_kb.hpp"

#include "solaudit/error.hpp"
#include "solaudit/hash.hpp"
#include "solaudit/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

namespace solaudit {

namespace {

constexpr std::string_view kFormatName = "solaudit-kb";
constexpr int kFormatVersion = 1;

bool hit_before(const RetrievalHit& a, const RetrievalHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.entry->inserted_at != b.entry->inserted_at) {
        return a.entry->inserted_at < b.entry->inserted_at;
    }
    return a.entry->entry_id < b.entry->entry_id;
}

Json entry_to_json(const KnowledgeEntry& entry) {
    Json j;
    j["entry_id"] = entry.entry_id;
    j["inserted_at"] = entry.inserted_at;
    j["metadata"] = to_json(entry.metadata);
    j["slice_text"] = entry.slice_text;
    j["vector"] = Json::array();
    for (const double v : entry.vector.values()) j["vector"].push_back(v);
    return j;
}

KnowledgeEntry entry_from_json(const Json& j) {
    KnowledgeEntry entry;
    entry.entry_id = j.at("entry_id").get<std::string>();
    entry.inserted_at = j.at("inserted_at").get<std::uint64_t>();
    entry.metadata = metadata_from_json(j.at("metadata"));
    entry.slice_text = j.at("slice_text").get<std::string>();
    std::vector<double> values;
    for (const auto& v : j.at("vector")) values.push_back(v.get<double>());
    entry.vector = EmbeddingVector(std::move(values));
    return entry;
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch, "cannot compare vectors of dim " +
                                                      std::to_string(a.size()) + " and " +
                                                      std::to_string(b.size()));
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        throw Error(ErrorKind::ZeroVector, "cosine similarity of a zero vector");
    }
    const double sim = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
    return std::clamp(sim, -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine_similarity(a.values(), b.values());
}

std::string entry_id_for(const ContextSlice& slice) {
    return slice.metadata.source_file + "::" + slice.metadata.contract_name + "::" +
           slice.main_function.name + "@L" + std::to_string(slice.main_function.start_line);
}

VectorStore::VectorStore(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw Error(ErrorKind::InvalidConfig, "store dimension must be positive");
}

VectorStore::VectorStore(const VectorStore& other) : dim_(other.dim_) {
    std::shared_lock lock(other.mutex_);
    clock_ = other.clock_;
    entries_ = other.entries_;
    ids_ = other.ids_;
}

VectorStore& VectorStore::operator=(const VectorStore& other) {
    if (this == &other) return *this;
    std::unique_lock mine(mutex_, std::defer_lock);
    std::shared_lock theirs(other.mutex_, std::defer_lock);
    std::lock(mine, theirs);
    dim_ = other.dim_;
    clock_ = other.clock_;
    entries_ = other.entries_;
    ids_ = other.ids_;
    return *this;
}

std::size_t VectorStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

bool VectorStore::contains(const std::string& entry_id) const {
    std::shared_lock lock(mutex_);
    return ids_.count(entry_id) != 0;
}

std::vector<std::shared_ptr<const KnowledgeEntry>> VectorStore::entries() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

void VectorStore::insert(KnowledgeEntry entry) {
    std::unique_lock lock(mutex_);
    insert_locked(std::move(entry));
}

void VectorStore::insert_locked(KnowledgeEntry entry) {
    if (ids_.count(entry.entry_id) != 0) {
        throw Error(ErrorKind::DuplicateId, "entry '" + entry.entry_id + "' already exists");
    }
    if (entry.vector.dim() != dim_) {
        throw Error(ErrorKind::DimensionMismatch,
                    "entry dim " + std::to_string(entry.vector.dim()) + " != store dim " +
                        std::to_string(dim_));
    }
    entry.inserted_at = clock_++;
    ids_.insert(entry.entry_id);
    entries_.push_back(std::make_shared<const KnowledgeEntry>(std::move(entry)));
}

std::vector<RetrievalHit> VectorStore::ranked(const EmbeddingVector& probe) const {
    if (probe.dim() != dim_) {
        throw Error(ErrorKind::DimensionMismatch, "probe dim " + std::to_string(probe.dim()) +
                                                      " != store dim " + std::to_string(dim_));
    }
    std::vector<RetrievalHit> hits;
    hits.reserve(entries_.size());
    for (const auto& entry : entries_) {
        hits.push_back({entry, cosine_similarity(probe, entry->vector), 0});
    }
    return hits;
}

std::vector<RetrievalHit> VectorStore::query_top_k(const EmbeddingVector& probe,
                                                   std::size_t k) const {
    if (k == 0) throw Error(ErrorKind::InvalidConfig, "k must be >= 1");
    std::shared_lock lock(mutex_);
    auto hits = ranked(probe);
    const std::size_t keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                      hit_before);
    hits.resize(keep);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
    return hits;
}

std::vector<RetrievalHit> VectorStore::query_threshold(const EmbeddingVector& probe,
                                                       Threshold threshold) const {
    std::shared_lock lock(mutex_);
    auto hits = ranked(probe);
    std::erase_if(hits, [&](const RetrievalHit& h) { return !(h.similarity > threshold.theta); });
    std::sort(hits.begin(), hits.end(), hit_before);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
    return hits;
}

UpdateOutcome VectorStore::dynamic_update(const ContextSlice& slice, const EmbeddingVector& probe,
                                          Threshold threshold, const VerifierCallback& verifier) {
    std::unique_lock lock(mutex_);
    UpdateOutcome outcome;
    auto hits = ranked(probe);
    std::erase_if(hits, [&](const RetrievalHit& h) { return !(h.similarity > threshold.theta); });
    if (!hits.empty()) {
        std::sort(hits.begin(), hits.end(), hit_before);
        for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
        outcome.kind = UpdateKind::Matched;
        outcome.matches = std::move(hits);
        return outcome;
    }

    try {
        outcome.confirmed_swc = verifier(slice);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::VerificationFailed, e.what());
    }
    if (outcome.confirmed_swc.empty()) {
        outcome.kind = UpdateKind::Clean;
        return outcome;
    }

    KnowledgeEntry entry;
    entry.entry_id = "dyn::" + entry_id_for(slice);
    for (int n = 2; ids_.count(entry.entry_id) != 0; ++n) {
        entry.entry_id = "dyn::" + entry_id_for(slice) + "#" + std::to_string(n);
    }
    entry.vector = probe;
    entry.slice_text = slice.assembled_text;
    entry.metadata = slice.metadata;
    entry.metadata.swc_types = outcome.confirmed_swc;
    outcome.inserted_id = entry.entry_id;
    insert_locked(std::move(entry));
    outcome.kind = UpdateKind::Inserted;
    return outcome;
}

void VectorStore::save(const std::filesystem::path& path) const {
    std::string body;
    std::size_t count = 0;
    {
        std::shared_lock lock(mutex_);
        for (const auto& entry : entries_) {
            body += entry_to_json(*entry).dump();
            body.push_back('\n');
        }
        count = entries_.size();
    }
    Json header;
    header["format"] = kFormatName;
    header["version"] = kFormatVersion;
    header["dim"] = dim_;
    header["count"] = count;
    header["checksum"] = to_hex(fnv1a64(body));

    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + tmp.string());
        out << header.dump() << '\n' << body;
        if (!out.flush()) throw Error(ErrorKind::IoFailure, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot rename to " + path.string() + ": " + ec.message());
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw Error(ErrorKind::CorruptStore, path.string() + ": missing header");
    }
    std::stringstream rest;
    rest << in.rdbuf();
    const std::string body = rest.str();

    try {
        const Json header = Json::parse(header_line);
        if (header.at("format").get<std::string>() != kFormatName ||
            header.at("version").get<int>() != kFormatVersion) {
            throw Error(ErrorKind::CorruptStore, path.string() + ": unknown format or version");
        }
        const auto dim = header.at("dim").get<std::size_t>();
        const auto count = header.at("count").get<std::size_t>();
        if (to_hex(fnv1a64(body)) != header.at("checksum").get<std::string>()) {
            throw Error(ErrorKind::CorruptStore, path.string() + ": checksum mismatch");
        }

        VectorStore store(dim);
        std::istringstream lines(body);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            KnowledgeEntry entry = entry_from_json(Json::parse(line));
            if (entry.vector.dim() != dim || store.ids_.count(entry.entry_id) != 0) {
                throw Error(ErrorKind::CorruptStore, path.string() + ": bad entry " + entry.entry_id);
            }
            store.clock_ = std::max(store.clock_, entry.inserted_at + 1);
            store.ids_.insert(entry.entry_id);
            store.entries_.push_back(std::make_shared<const KnowledgeEntry>(std::move(entry)));
        }
        if (store.entries_.size() != count) {
            throw Error(ErrorKind::CorruptStore, path.string() + ": entry count mismatch");
        }
        return store;
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::CorruptStore, path.string() + ": " + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::CorruptStore) throw;
        throw Error(ErrorKind::CorruptStore, path.string() + ": " + e.what());
    }
}

bool VectorStore::operator==(const VectorStore& other) const {
    if (this == &other) return true;
    std::shared_lock mine(mutex_, std::defer_lock);
    std::shared_lock theirs(other.mutex_, std::defer_lock);
    std::lock(mine, theirs);
    if (dim_ != other.dim_ || entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(*entries_[i] == *other.entries_[i])) return false;
    }
    return true;
}

}  // namespace solaudit
