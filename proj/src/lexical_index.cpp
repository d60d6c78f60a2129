#include "qrag/lexical_index.hpp"

#include <cmath>
#include <unordered_map>

#include "qrag/error.hpp"
#include "qrag/snapshot.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

namespace {

constexpr double kBm25K1 = 1.2;
constexpr double kBm25B = 0.75;
constexpr double kIdfFloor = 1e-6;

}  // namespace

std::vector<std::string> char_ngrams(std::string_view text, std::size_t n) {
    std::vector<char32_t> chars = decode_utf8(text);
    std::vector<std::string> grams;
    if (chars.empty()) return grams;
    if (chars.size() < n) {
        grams.push_back(encode_utf8(chars));
        return grams;
    }
    grams.reserve(chars.size() - n + 1);
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
        std::string gram;
        for (std::size_t j = 0; j < n; ++j) append_utf8(gram, chars[i + j]);
        grams.push_back(std::move(gram));
    }
    return grams;
}

LexicalIndex LexicalIndex::build(const EntryStore& store, std::size_t n) {
    if (n < 1) throw ValidationError("lexical index: gram size must be >= 1");
    LexicalIndex index;
    index.n_ = n;

    std::uint64_t total_length = 0;
    for (std::uint32_t ord = 0; ord < store.size(); ++ord) {
        const KnowledgeEntry& entry = store.entry(ord);
        index.entry_ids_.push_back(entry.id);

        std::vector<std::string> grams = char_ngrams(entry.text, n);
        index.lengths_.push_back(static_cast<std::uint32_t>(grams.size()));
        total_length += grams.size();

        std::unordered_map<std::string, std::uint32_t> tf;
        for (const std::string& gram : grams) ++tf[gram];
        for (const auto& [gram, freq] : tf) {
            index.postings_[gram].push_back({ord, freq});
        }
    }
    for (auto& [gram, list] : index.postings_) {
        std::sort(list.begin(), list.end(),
                  [](const Posting& a, const Posting& b) { return a.ord < b.ord; });
    }
    index.avg_length_ =
        store.empty() ? 0.0 : static_cast<double>(total_length) / static_cast<double>(store.size());
    return index;
}

std::vector<ScoredHit> LexicalIndex::search(std::string_view query, std::size_t k) const {
    if (k < 1) throw ValidationError("lexical search: k must be >= 1");
    std::vector<ScoredHit> hits;
    if (entry_ids_.empty()) return hits;

    // Unique query grams in first-occurrence order keep float accumulation
    // independent of entry insertion order.
    std::vector<std::pair<std::string, std::uint32_t>> query_grams;
    {
        std::unordered_map<std::string, std::size_t> at;
        for (std::string& gram : char_ngrams(query, n_)) {
            auto it = at.find(gram);
            if (it == at.end()) {
                at.emplace(gram, query_grams.size());
                query_grams.emplace_back(std::move(gram), 1);
            } else {
                ++query_grams[it->second].second;
            }
        }
    }

    const double count = static_cast<double>(entry_ids_.size());
    std::unordered_map<std::uint32_t, double> scores;
    for (const auto& [gram, qtf] : query_grams) {
        auto it = postings_.find(gram);
        if (it == postings_.end()) continue;
        const auto& list = it->second;
        double df = static_cast<double>(list.size());
        double idf = std::log((count - df + 0.5) / (df + 0.5));
        if (idf < kIdfFloor) idf = kIdfFloor;
        for (const Posting& posting : list) {
            double f = static_cast<double>(posting.tf);
            double norm_len = static_cast<double>(lengths_[posting.ord]) / avg_length_;
            double denom = f + kBm25K1 * (1.0 - kBm25B + kBm25B * norm_len);
            scores[posting.ord] +=
                static_cast<double>(qtf) * idf * (kBm25K1 + 1.0) * f / denom;
        }
    }

    hits.reserve(scores.size());
    for (const auto& [ord, score] : scores) {
        if (score > 0.0) hits.push_back({entry_ids_[ord], score});
    }
    sort_hits(hits);
    truncate_hits(hits, k);
    return hits;
}

void LexicalIndex::save(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "lexical_index";
    doc["n"] = n_;
    doc["entry_ids"] = entry_ids_;
    doc["lengths"] = lengths_;
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [gram, list] : postings_) {
        nlohmann::json rows = nlohmann::json::array();
        for (const Posting& p : list) rows.push_back({p.ord, p.tf});
        postings[gram] = std::move(rows);
    }
    doc["postings"] = std::move(postings);
    write_json_file(doc, path);
}

LexicalIndex LexicalIndex::load(const std::filesystem::path& path) {
    nlohmann::json doc = read_json_file(path);
    check_snapshot_header(doc, "lexical_index");
    LexicalIndex index;
    index.n_ = doc["n"].get<std::size_t>();
    index.entry_ids_ = doc["entry_ids"].get<std::vector<std::string>>();
    index.lengths_ = doc["lengths"].get<std::vector<std::uint32_t>>();
    std::uint64_t total = 0;
    for (std::uint32_t len : index.lengths_) total += len;
    index.avg_length_ = index.entry_ids_.empty()
                            ? 0.0
                            : static_cast<double>(total) /
                                  static_cast<double>(index.entry_ids_.size());
    for (const auto& [gram, rows] : doc["postings"].items()) {
        auto& list = index.postings_[gram];
        for (const auto& row : rows) {
            list.push_back({row[0].get<std::uint32_t>(), row[1].get<std::uint32_t>()});
        }
    }
    return index;
}

}  // namespace qrag
