#include "qrag/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "qrag/error.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

namespace {

constexpr std::size_t kMinEntitySpan = 2;
constexpr std::size_t kMaxEntitySpan = 6;

void minmax_normalize(std::vector<ScoredHit>& hits) {
    if (hits.empty()) return;
    double lo = hits.front().score, hi = hits.front().score;
    for (const ScoredHit& h : hits) {
        lo = std::min(lo, h.score);
        hi = std::max(hi, h.score);
    }
    for (ScoredHit& h : hits) {
        h.score = (hi == lo) ? 1.0 : (h.score - lo) / (hi - lo);
    }
}

double fuse(const RetrievalCandidate& c, const RetrieveConfig& config) {
    double fused = 0.0;
    if (c.lexical) fused += config.w_lex * *c.lexical;
    if (c.semantic) fused += config.w_sem * *c.semantic;
    if (c.phonetic) fused += config.w_pho * *c.phonetic;
    return fused;
}

void sort_pool(std::vector<RetrievalCandidate>& pool) {
    std::sort(pool.begin(), pool.end(),
              [](const RetrievalCandidate& a, const RetrievalCandidate& b) {
                  if (a.fused != b.fused) return a.fused > b.fused;
                  return a.entry_id < b.entry_id;
              });
}

}  // namespace

void RetrieveConfig::validate() const {
    if (k_per_channel < 1 || k_per_source < 1) {
        throw ValidationError("retrieve config: k values must be >= 1");
    }
    if (w_lex < 0.0 || w_sem < 0.0 || w_pho < 0.0) {
        throw ValidationError("retrieve config: fusion weights must be non-negative");
    }
    if (std::abs(w_lex + w_sem + w_pho - 1.0) > 1e-9) {
        throw ValidationError("retrieve config: fusion weights must sum to 1");
    }
}

std::vector<RetrievalCandidate> multi_search(const SearchChannels& channels,
                                             const EntryStore& store, std::string_view query,
                                             const RetrieveConfig& config) {
    config.validate();
    if (trim_view(query).empty()) throw ValidationError("multi_search: empty query");

    std::unordered_map<std::string, std::size_t> at;
    std::vector<RetrievalCandidate> pool;
    auto upsert = [&](const ScoredHit& hit) -> RetrievalCandidate& {
        auto it = at.find(hit.id);
        if (it == at.end()) {
            at.emplace(hit.id, pool.size());
            RetrievalCandidate c;
            c.entry_id = hit.id;
            if (auto ord = store.find(hit.id)) c.source = store.entry(*ord).source;
            pool.push_back(std::move(c));
            return pool.back();
        }
        return pool[it->second];
    };
    auto merge_channel = [&](std::vector<ScoredHit> hits,
                             std::optional<double> RetrievalCandidate::* channel) {
        minmax_normalize(hits);
        for (const ScoredHit& hit : hits) {
            RetrievalCandidate& c = upsert(hit);
            std::optional<double>& slot = c.*channel;
            slot = slot ? std::max(*slot, hit.score) : hit.score;
        }
    };

    if (channels.lexical) {
        merge_channel(channels.lexical->search(query, config.k_per_channel),
                      &RetrievalCandidate::lexical);
    }
    if (channels.phonetic) {
        if (!channels.pinyin) throw ValidationError("multi_search: phonetic channel needs a pinyin table");
        merge_channel(channels.phonetic->search(query, *channels.pinyin, config.k_per_channel),
                      &RetrievalCandidate::phonetic);
    }
    if (channels.vector) {
        if (!channels.embedder) throw ValidationError("multi_search: vector channel needs an embedder");
        merge_channel(channels.vector->search(query, *channels.embedder, config.k_per_channel),
                      &RetrievalCandidate::semantic);
    }

    for (RetrievalCandidate& c : pool) c.fused = fuse(c, config);
    sort_pool(pool);
    return pool;
}

std::vector<EntityHit> extract_entity_candidates(std::string_view query, const EntryStore& store,
                                                 const PinyinTable& table,
                                                 const FuzzyRules& rules) {
    // Entity names bucketed by scalar length so each query span is compared
    // only against names it could equal.
    std::map<std::size_t, std::vector<std::uint32_t>> by_length;
    for (std::uint32_t ord = 0; ord < store.size(); ++ord) {
        const KnowledgeEntry& entry = store.entry(ord);
        if (entry.source != Source::entity) continue;
        std::size_t len = scalar_length(entry.text);
        if (len >= kMinEntitySpan && len <= kMaxEntitySpan) by_length[len].push_back(ord);
    }

    std::vector<char32_t> chars = decode_utf8(query);
    std::unordered_map<std::string, std::size_t> best;  // entity id -> index into hits
    std::vector<EntityHit> hits;
    for (std::size_t len = kMinEntitySpan; len <= kMaxEntitySpan; ++len) {
        auto bucket = by_length.find(len);
        if (bucket == by_length.end() || chars.size() < len) continue;
        for (std::size_t i = 0; i + len <= chars.size(); ++i) {
            std::string span;
            for (std::size_t j = 0; j < len; ++j) append_utf8(span, chars[i + j]);
            for (std::uint32_t ord : bucket->second) {
                const KnowledgeEntry& entity = store.entry(ord);
                if (span != entity.text && !phonetic_equal(span, entity.text, table, rules)) {
                    continue;
                }
                auto it = best.find(entity.id);
                if (it == best.end()) {
                    best.emplace(entity.id, hits.size());
                    hits.push_back({entity.id, span});
                } else if (scalar_length(span) > scalar_length(hits[it->second].span)) {
                    hits[it->second].span = span;
                }
            }
        }
    }
    return hits;
}

void merge_entity_hits(std::vector<RetrievalCandidate>& pool, const std::vector<EntityHit>& hits,
                       const RetrieveConfig& config) {
    for (const EntityHit& hit : hits) {
        auto it = std::find_if(pool.begin(), pool.end(), [&](const RetrievalCandidate& c) {
            return c.entry_id == hit.entry_id;
        });
        if (it == pool.end()) {
            RetrievalCandidate c;
            c.entry_id = hit.entry_id;
            c.source = Source::entity;
            pool.push_back(std::move(c));
            it = std::prev(pool.end());
        }
        it->phonetic = it->phonetic ? std::max(*it->phonetic, 1.0) : 1.0;
        it->matched_span = hit.span;
        it->fused = fuse(*it, config);
    }
    sort_pool(pool);
}

HttpReranker::HttpReranker(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.empty()) throw ValidationError("http reranker: endpoint not set");
}

std::string HttpReranker::name() const { return "http-rerank:" + endpoint_.base_url; }

std::vector<double> HttpReranker::score(const std::string& query,
                                        const std::vector<std::string>& texts) const {
    nlohmann::json doc =
        post_backend_json(endpoint_, "/rerank", {{"query", query}, {"texts", texts}});
    if (!doc.is_object() || !doc.contains("scores") || !doc["scores"].is_array()) {
        throw BackendError("/rerank: response missing scores array");
    }
    if (doc["scores"].size() != texts.size()) {
        throw BackendError("/rerank: got " + std::to_string(doc["scores"].size()) +
                           " scores for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& x : doc["scores"]) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
            throw BackendError("/rerank: non-finite score in response");
        }
        scores.push_back(x.get<double>());
    }
    return scores;
}

std::vector<RetrievalCandidate> rerank(std::string_view query,
                                       std::vector<RetrievalCandidate> pool,
                                       const EntryStore& store, const Reranker* reranker,
                                       const RetrieveConfig& config) {
    config.validate();
    if (pool.empty()) return pool;

    if (reranker) {
        std::vector<std::string> texts;
        texts.reserve(pool.size());
        for (const RetrievalCandidate& c : pool) {
            auto ord = store.find(c.entry_id);
            if (!ord) throw ValidationError("rerank: candidate not in entry store: " + c.entry_id);
            texts.push_back(store.entry(*ord).text);
        }
        std::vector<double> scores = reranker->score(std::string(query), texts);
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i].rerank_score = scores[i];
    } else {
        for (RetrievalCandidate& c : pool) c.rerank_score = c.fused;
    }

    if (config.rerank_floor) {
        std::erase_if(pool, [&](const RetrievalCandidate& c) {
            return *c.rerank_score < *config.rerank_floor;
        });
    }

    std::sort(pool.begin(), pool.end(),
              [](const RetrievalCandidate& a, const RetrievalCandidate& b) {
                  if (*a.rerank_score != *b.rerank_score) return *a.rerank_score > *b.rerank_score;
                  return a.entry_id < b.entry_id;
              });

    std::unordered_map<int, std::size_t> taken;
    std::vector<RetrievalCandidate> out;
    for (RetrievalCandidate& c : pool) {
        std::size_t& n = taken[static_cast<int>(c.source)];
        if (n >= config.k_per_source) continue;
        ++n;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace qrag
