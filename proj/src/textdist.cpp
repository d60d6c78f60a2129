#include "qrag/textdist.hpp"

#include "qrag/error.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a == b) return 0;
    std::vector<char32_t> ca = decode_utf8(a);
    std::vector<char32_t> cb = decode_utf8(b);
    return levenshtein_seq(std::span<const char32_t>(ca), std::span<const char32_t>(cb));
}

DistancePair normalized_distance(std::string_view a, std::string_view b) {
    std::vector<char32_t> ca = decode_utf8(a);
    std::vector<char32_t> cb = decode_utf8(b);
    return normalized_distance_seq(std::span<const char32_t>(ca), std::span<const char32_t>(cb));
}

double cer(std::string_view reference, std::string_view hypothesis) {
    std::vector<char32_t> cr = decode_utf8(reference);
    if (cr.empty()) throw ValidationError("cer: empty reference");
    std::vector<char32_t> ch = decode_utf8(hypothesis);
    std::size_t edits = levenshtein_seq(std::span<const char32_t>(cr), std::span<const char32_t>(ch));
    return static_cast<double>(edits) / static_cast<double>(cr.size());
}

CorpusCer corpus_cer(std::span<const std::pair<std::string, std::string>> pairs) {
    if (pairs.empty()) throw ValidationError("corpus_cer: empty pair list");
    CorpusCer agg;
    double macro_sum = 0.0;
    for (const auto& [reference, hypothesis] : pairs) {
        std::vector<char32_t> cr = decode_utf8(reference);
        if (cr.empty()) throw ValidationError("corpus_cer: empty reference");
        std::vector<char32_t> ch = decode_utf8(hypothesis);
        std::size_t edits =
            levenshtein_seq(std::span<const char32_t>(cr), std::span<const char32_t>(ch));
        agg.total_edits += edits;
        agg.total_reference_length += cr.size();
        macro_sum += static_cast<double>(edits) / static_cast<double>(cr.size());
    }
    agg.micro = static_cast<double>(agg.total_edits) /
                static_cast<double>(agg.total_reference_length);
    agg.macro = macro_sum / static_cast<double>(pairs.size());
    return agg;
}

}  // namespace qrag
