#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/hits.hpp"
#include "qrag/knowledge.hpp"
#include "qrag/pinyin.hpp"

namespace qrag {

// Pinyin inverted index: entries are stored as fuzzy-canonical syllable-token
// sequences, posted under token n-grams. Search gathers candidates by gram
// overlap and rescores each as 1 − normalized edit distance between the full
// sequences, so exact homophones score 1.0.
class PhoneticIndex {
  public:
    static PhoneticIndex build(const EntryStore& store, const PinyinTable& table,
                               const FuzzyRules& rules, std::size_t n = 2);

    std::vector<ScoredHit> search(std::string_view query, const PinyinTable& table,
                                  std::size_t k) const;

    std::size_t gram_size() const { return n_; }
    std::size_t doc_count() const { return entry_ids_.size(); }
    const FuzzyRules& rules() const { return rules_; }
    const std::vector<std::string>& syllables(std::uint32_t ord) const {
        return sequences_[ord];
    }

    void save(const std::filesystem::path& path) const;
    static PhoneticIndex load(const std::filesystem::path& path);

  private:
    std::size_t n_ = 2;
    FuzzyRules rules_;
    std::vector<std::string> entry_ids_;             // ord -> id
    std::vector<std::vector<std::string>> sequences_;  // ord -> canonical tokens
    std::map<std::string, std::vector<std::uint32_t>> postings_;  // gram -> ords

    void rebuild_postings();
};

}  // namespace qrag
