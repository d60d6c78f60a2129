#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/embedder.hpp"
#include "qrag/http_client.hpp"
#include "qrag/knowledge.hpp"
#include "qrag/lexical_index.hpp"
#include "qrag/phonetic_index.hpp"
#include "qrag/pinyin.hpp"
#include "qrag/vector_index.hpp"

namespace qrag {

struct RetrievalCandidate {
    std::string entry_id;
    Source source = Source::web;
    // Channel scores, min-max normalized to [0,1] within their hit list.
    std::optional<double> lexical;
    std::optional<double> phonetic;
    std::optional<double> semantic;
    double fused = 0.0;
    std::optional<double> rerank_score;
    std::optional<std::string> matched_span;  // entity hits: the query span that matched
};

struct RetrieveConfig {
    std::size_t k_per_channel = 20;
    double w_lex = 0.4;
    double w_sem = 0.4;
    double w_pho = 0.2;
    std::size_t k_per_source = 5;
    std::optional<double> rerank_floor;  // drop candidates scoring below; off by default

    void validate() const;  // throws ValidationError
};

struct SearchChannels {
    const LexicalIndex* lexical = nullptr;
    const PhoneticIndex* phonetic = nullptr;
    const VectorIndex* vector = nullptr;
    const Embedder* embedder = nullptr;
    const PinyinTable* pinyin = nullptr;
};

// Union of the per-channel top-k hit lists, deduplicated by entry id with the
// maximum score per channel, channel-normalized, then fused with the config
// weights. Pool is ordered by fused score descending, id ascending.
std::vector<RetrievalCandidate> multi_search(const SearchChannels& channels,
                                             const EntryStore& store, std::string_view query,
                                             const RetrieveConfig& config);

struct EntityHit {
    std::string entry_id;
    std::string span;  // query substring that matched the entity name
};

// Every query substring of 2..6 scalars, matched against entity names by
// exact equality or phonetic_equal. One hit per entity, longest span kept.
std::vector<EntityHit> extract_entity_candidates(std::string_view query, const EntryStore& store,
                                                 const PinyinTable& table,
                                                 const FuzzyRules& rules = {});

// Folds entity hits into the candidate pool: a matched entity scores 1.0 on
// the phonetic channel (it is a phonetic-or-exact name match) and its fused
// score is recomputed. Pool order is restored afterwards.
void merge_entity_hits(std::vector<RetrievalCandidate>& pool, const std::vector<EntityHit>& hits,
                       const RetrieveConfig& config);

class Reranker {
  public:
    virtual ~Reranker() = default;
    virtual std::string name() const = 0;
    // One relevance score per text, same order.
    virtual std::vector<double> score(const std::string& query,
                                      const std::vector<std::string>& texts) const = 0;
};

// POST /rerank {"query":string,"texts":[string]} -> {"scores":[number]}.
class HttpReranker : public Reranker {
  public:
    explicit HttpReranker(HttpEndpoint endpoint);
    std::string name() const override;
    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& texts) const override;

  private:
    HttpEndpoint endpoint_;
};

// Scores the pool with the reranker (nullptr = fusion fallback: fused scores
// pass through), applies the optional floor, caps each source at
// k_per_source, and orders by rerank score descending, id ascending.
std::vector<RetrievalCandidate> rerank(std::string_view query,
                                       std::vector<RetrievalCandidate> pool,
                                       const EntryStore& store, const Reranker* reranker,
                                       const RetrieveConfig& config);

}  // namespace qrag
