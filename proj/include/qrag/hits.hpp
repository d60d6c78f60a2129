#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace qrag {

struct ScoredHit {
    std::string id;
    double score = 0.0;

    bool operator==(const ScoredHit&) const = default;
};

// Score descending, ties by id ascending — the ordering contract shared by
// every retrieval channel.
inline void sort_hits(std::vector<ScoredHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

inline void truncate_hits(std::vector<ScoredHit>& hits, std::size_t k) {
    if (hits.size() > k) hits.resize(k);
}

}  // namespace qrag
