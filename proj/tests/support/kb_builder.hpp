#pragma once

#include "synthetic.hpp"

#include <solaudit/embedding.hpp>
#include <solaudit/slicer.hpp>
#include <solaudit/source.hpp>
#include <solaudit/vector_kb.hpp>

#include <vector>

namespace synthetic {

inline std::vector<solaudit::ContextSlice> annotated_slices(const std::vector<Contract>& contracts,
                                                            solaudit::DepthBound bound = {}) {
    std::vector<solaudit::SourceUnit> units;
    for (const auto& c : contracts) {
        auto unit = solaudit::parse_source(c.source, c.file_name);
        units.push_back(solaudit::tag_functions(std::move(unit), solaudit::extract_annotations(c.source)).unit);
    }
    return solaudit::build_corpus(units, bound, true);
}

inline solaudit::VectorStore build_store(const std::vector<solaudit::ContextSlice>& slices,
                                         const solaudit::EmbeddingProvider& embedder) {
    solaudit::VectorStore store(embedder.dim());
    for (const auto& s : slices) {
        store.insert({solaudit::entry_id_for(s), embedder.embed(s.assembled_text), s.assembled_text,
                      s.metadata, 0});
    }
    return store;
}

}  // namespace synthetic
