#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/embedder.hpp"
#include "qrag/hits.hpp"
#include "qrag/knowledge.hpp"

namespace qrag {

// Dense unit-norm embeddings, ranked by exhaustive cosine scan. Entries whose
// embedding is the zero sentinel are kept (ordinals stay aligned with the
// store) but never ranked. Searches check the embedder identity so a query
// can never be scored in a different embedding space than the index.
class VectorIndex {
  public:
    static VectorIndex build(const EntryStore& store, const Embedder& embedder);

    std::vector<ScoredHit> search(std::string_view query, const Embedder& embedder,
                                  std::size_t k) const;

    std::size_t dimension() const { return dimension_; }
    const std::string& embedder_identity() const { return identity_; }
    std::size_t doc_count() const { return entry_ids_.size(); }

    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

  private:
    std::size_t dimension_ = 0;
    std::string identity_;
    std::vector<std::string> entry_ids_;          // ord -> id
    std::vector<std::vector<double>> vectors_;    // unit norm or zero sentinel
};

}  // namespace qrag
