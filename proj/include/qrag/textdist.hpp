#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrag {

// Edit count plus its max-length normalization. The normalization denominator
// is max(|a|, |b|) so the ratio always lands in [0, 1]; CER uses the reference
// length instead and may exceed 1.
struct DistancePair {
    std::size_t raw_edits = 0;
    double normalized = 0.0;
};

// Two-row Levenshtein over arbitrary token sequences. Uniform 1/1/1 costs,
// no transposition.
template <typename T>
std::size_t levenshtein_seq(std::span<const T> a, std::span<const T> b) {
    if (a.size() > b.size()) return levenshtein_seq(b, a);
    std::vector<std::size_t> prev(a.size() + 1);
    std::vector<std::size_t> curr(a.size() + 1);
    for (std::size_t i = 0; i <= a.size(); ++i) prev[i] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
        curr[0] = j;
        for (std::size_t i = 1; i <= a.size(); ++i) {
            std::size_t sub = prev[i - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[i] = std::min({prev[i] + 1, curr[i - 1] + 1, sub});
        }
        std::swap(prev, curr);
    }
    return prev[a.size()];
}

// Edit distance between two UTF-8 strings, counted in Unicode scalar values.
std::size_t levenshtein(std::string_view a, std::string_view b);

// levenshtein(a, b) / max(|a|, |b|); 0 when both strings are empty.
DistancePair normalized_distance(std::string_view a, std::string_view b);

template <typename T>
DistancePair normalized_distance_seq(std::span<const T> a, std::span<const T> b) {
    DistancePair d;
    d.raw_edits = levenshtein_seq(a, b);
    std::size_t denom = std::max(a.size(), b.size());
    d.normalized = denom == 0 ? 0.0 : static_cast<double>(d.raw_edits) / static_cast<double>(denom);
    return d;
}

// Character error rate: edits / |reference|. Throws ValidationError on an
// empty reference (the metric is undefined there).
double cer(std::string_view reference, std::string_view hypothesis);

struct CorpusCer {
    double micro = 0.0;  // sum of edits / sum of reference lengths
    double macro = 0.0;  // mean of per-pair CER
    std::size_t total_edits = 0;
    std::size_t total_reference_length = 0;
};

// Aggregate CER over (reference, hypothesis) pairs. Empty input or any empty
// reference throws ValidationError.
CorpusCer corpus_cer(std::span<const std::pair<std::string, std::string>> pairs);

}  // namespace qrag
