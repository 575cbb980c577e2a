#include "solaudit/evalharness.hpp"

#include "solaudit/error.hpp"
#include "solaudit/hash.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <spdlog/spdlog.h>

namespace solaudit {

std::vector<EvalSample> samples_from_kb(const VectorStore& kb) {
    std::vector<EvalSample> samples;
    for (const auto& entry : kb.entries()) {
        samples.push_back({entry->entry_id, entry->slice_text, entry->metadata.contract_name,
                           entry->metadata.source_file});
    }
    return samples;
}

RetrievalMetrics compute_retrieval_metrics(const std::vector<std::optional<std::size_t>>& ranks,
                                           const std::vector<int>& ks) {
    RetrievalMetrics m;
    m.n_samples = ranks.size();
    for (const int k : ks) m.recall_at[k] = 0.0;
    if (ranks.empty()) return m;
    const auto n = static_cast<double>(ranks.size());
    for (const int k : ks) {
        const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](const auto& r) {
            return r && *r >= 1 && *r <= static_cast<std::size_t>(k);
        });
        m.recall_at[k] = 100.0 * static_cast<double>(hits) / n;
    }
    double reciprocal_sum = 0.0;
    for (const auto& r : ranks) {
        if (r && *r >= 1) reciprocal_sum += 1.0 / static_cast<double>(*r);
    }
    m.mrr = reciprocal_sum / n;
    return m;
}

std::optional<std::size_t> rank_of(const std::vector<RetrievalHit>& hits,
                                   const std::string& entry_id) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (hits[i].entry->entry_id == entry_id) return i + 1;
    }
    return std::nullopt;
}

Probe make_probe(const EvalSample& sample, const MutationSpec& spec,
                 const EmbeddingProvider& embedder, DepthBound bound) {
    MutationSpec local = spec;
    local.seed = splitmix64(spec.seed ^ fnv1a64(sample.entry_id));
    const std::string source = reconstruct_source(sample.text, sample.contract_name);
    const MutationResult mutant = mutate(source, local);
    const SourceUnit unit = parse_source(mutant.text, sample.source_file);
    if (unit.functions.empty()) {
        throw Error(ErrorKind::ParseFailure, "mutant of " + sample.entry_id + " has no functions");
    }
    const ContextSlice slice = assemble_slice_at(unit, 0, bound);
    return {sample.entry_id, embedder.embed(slice.assembled_text)};
}

std::vector<RobustnessRow> robustness_eval(const VectorStore& kb,
                                           const std::vector<EvalSample>& samples,
                                           const std::vector<MutationSpec>& specs,
                                           std::size_t k_max, const EmbeddingProvider& embedder,
                                           DepthBound bound, std::size_t parallelism) {
    if (k_max == 0) throw Error(ErrorKind::InvalidConfig, "k_max must be >= 1");
    std::vector<RobustnessRow> rows;
    for (const auto& spec : specs) {
        spec.validate();
        std::vector<std::optional<std::size_t>> ranks(samples.size());
        std::vector<char> ok(samples.size(), 0);
        auto run_one = [&](std::size_t i) {
            try {
                const Probe probe = make_probe(samples[i], spec, embedder, bound);
                ranks[i] = rank_of(kb.query_top_k(probe.vector, k_max), samples[i].entry_id);
                ok[i] = 1;
            } catch (const std::exception& e) {
                spdlog::warn("{} sample {} excluded: {}", mutation_label(spec.kind),
                             samples[i].entry_id, e.what());
            }
        };
        const std::size_t workers =
            std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(samples.size(), 1));
        if (workers == 1) {
            for (std::size_t i = 0; i < samples.size(); ++i) run_one(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < samples.size(); i = next++) run_one(i);
                });
            }
            for (auto& t : pool) t.join();
        }
        std::vector<std::optional<std::size_t>> kept;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (ok[i]) kept.push_back(ranks[i]);
        }
        RobustnessRow row;
        row.spec = spec;
        row.metrics = compute_retrieval_metrics(kept);
        row.failed = samples.size() - kept.size();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ThresholdRow> threshold_sweep(const VectorStore& kb, const std::vector<Probe>& probes,
                                          const std::vector<double>& thetas, std::size_t k_max) {
    if (k_max == 0) throw Error(ErrorKind::InvalidConfig, "k_max must be >= 1");
    std::vector<std::vector<RetrievalHit>> hits;
    hits.reserve(probes.size());
    for (const auto& p : probes) hits.push_back(kb.query_top_k(p.vector, k_max));

    std::vector<ThresholdRow> rows;
    for (const double theta : thetas) {
        std::vector<std::optional<std::size_t>> ranks;
        std::size_t retained = 0;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            std::vector<RetrievalHit> kept;
            for (const auto& h : hits[i]) {
                if (h.similarity > theta) kept.push_back(h);
            }
            if (!kept.empty()) ++retained;
            ranks.push_back(rank_of(kept, probes[i].original_id));
        }
        ThresholdRow row;
        row.theta = theta;
        row.metrics = compute_retrieval_metrics(ranks);
        row.metrics.retention_rate =
            probes.empty() ? 0.0
                           : 100.0 * static_cast<double>(retained) / static_cast<double>(probes.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

ClassificationMetrics classification_metrics(const std::vector<Prediction>& predictions) {
    if (predictions.empty()) throw Error(ErrorKind::EmptyInput, "no predictions");
    ClassificationMetrics m;
    for (const auto& p : predictions) {
        if (p.predicted && p.actual) ++m.tp;
        else if (p.predicted && !p.actual) ++m.fp;
        else if (!p.predicted && p.actual) ++m.fn;
        else ++m.tn;
    }
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    const auto acc = ratio(m.tp + m.tn, predictions.size());
    const auto precision = ratio(m.tp, m.tp + m.fp);
    const auto recall = ratio(m.tp, m.tp + m.fn);
    m.accuracy = acc ? std::optional(*acc * 100.0) : std::nullopt;
    m.precision = precision ? std::optional(*precision * 100.0) : std::nullopt;
    m.recall = recall ? std::optional(*recall * 100.0) : std::nullopt;
    if (precision && recall && *precision + *recall > 0.0) {
        m.f1 = 100.0 * 2.0 * *precision * *recall / (*precision + *recall);
    }
    return m;
}

}  // namespace solaudit
