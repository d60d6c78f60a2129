#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/hits.hpp"
#include "qrag/knowledge.hpp"

namespace qrag {

// Character n-grams of a text, as UTF-8 strings. Texts shorter than n
// collapse to a single gram holding the whole text.
std::vector<std::string> char_ngrams(std::string_view text, std::size_t n);

// Inverted character-n-gram index scored with BM25 (k1=1.2, b=0.75).
// Document length is counted in grams. Postings are ordinal-sorted; ordered
// map keys keep snapshots byte-stable.
class LexicalIndex {
  public:
    struct Posting {
        std::uint32_t ord = 0;
        std::uint32_t tf = 0;
    };

    static LexicalIndex build(const EntryStore& store, std::size_t n = 2);

    std::vector<ScoredHit> search(std::string_view query, std::size_t k) const;

    std::size_t gram_size() const { return n_; }
    std::size_t doc_count() const { return entry_ids_.size(); }

    void save(const std::filesystem::path& path) const;
    static LexicalIndex load(const std::filesystem::path& path);

  private:
    std::size_t n_ = 2;
    std::vector<std::string> entry_ids_;     // ord -> id
    std::vector<std::uint32_t> lengths_;     // ord -> gram count
    double avg_length_ = 0.0;
    std::map<std::string, std::vector<Posting>> postings_;
};

}  // namespace qrag
