#include "qrag/vector_index.hpp"

#include <cmath>

#include "qrag/error.hpp"
#include "qrag/snapshot.hpp"

namespace qrag {

VectorIndex VectorIndex::build(const EntryStore& store, const Embedder& embedder) {
    VectorIndex index;
    index.identity_ = embedder.identity();

    std::vector<std::string> texts;
    texts.reserve(store.size());
    for (const KnowledgeEntry& entry : store.entries()) texts.push_back(entry.text);

    std::vector<std::vector<double>> vectors = embedder.embed_batch(texts);
    for (std::uint32_t ord = 0; ord < store.size(); ++ord) {
        index.entry_ids_.push_back(store.entry(ord).id);
        l2_normalize(vectors[ord]);
        if (index.dimension_ == 0) index.dimension_ = vectors[ord].size();
        if (vectors[ord].size() != index.dimension_) {
            throw ValidationError("vector index: inconsistent embedding dimension");
        }
        index.vectors_.push_back(std::move(vectors[ord]));
    }
    if (index.dimension_ == 0) index.dimension_ = embedder.dimension();
    return index;
}

std::vector<ScoredHit> VectorIndex::search(std::string_view query, const Embedder& embedder,
                                           std::size_t k) const {
    if (k < 1) throw ValidationError("vector search: k must be >= 1");
    if (embedder.identity() != identity_) {
        throw ValidationError("vector search: embedder identity mismatch (index built with '" +
                              identity_ + "', got '" + embedder.identity() + "')");
    }
    std::vector<ScoredHit> hits;
    if (entry_ids_.empty()) return hits;

    std::vector<double> q = embedder.embed(query);
    if (q.size() != dimension_) {
        throw ValidationError("vector search: query dimension mismatch");
    }
    l2_normalize(q);
    if (l2_norm(q) == 0.0) return hits;  // no-information query

    for (std::uint32_t ord = 0; ord < entry_ids_.size(); ++ord) {
        const auto& v = vectors_[ord];
        if (l2_norm(v) == 0.0) continue;  // zero sentinel, unrankable
        hits.push_back({entry_ids_[ord], dot(q, v)});
    }
    sort_hits(hits);
    truncate_hits(hits, k);
    return hits;
}

void VectorIndex::save(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "vector_index";
    doc["dimension"] = dimension_;
    doc["embedder"] = identity_;
    doc["entry_ids"] = entry_ids_;
    doc["vectors"] = vectors_;
    write_json_file(doc, path);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    nlohmann::json doc = read_json_file(path);
    check_snapshot_header(doc, "vector_index");
    VectorIndex index;
    index.dimension_ = doc["dimension"].get<std::size_t>();
    index.identity_ = doc["embedder"].get<std::string>();
    index.entry_ids_ = doc["entry_ids"].get<std::vector<std::string>>();
    index.vectors_ = doc["vectors"].get<std::vector<std::vector<double>>>();
    for (const auto& v : index.vectors_) {
        if (v.size() != index.dimension_) {
            throw ValidationError("vector index snapshot: dimension mismatch");
        }
        double norm = l2_norm(v);
        if (norm != 0.0 && std::abs(norm - 1.0) > 1e-6) {
            throw ValidationError("vector index snapshot: non-unit vector");
        }
    }
    return index;
}

}  // namespace qrag
