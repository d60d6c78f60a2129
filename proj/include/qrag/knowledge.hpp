#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qrag/pinyin.hpp"

namespace qrag {

enum class Source { web, log, entity };

std::string_view source_name(Source source);
Source parse_source(std::string_view name);

// One retrievable knowledge item: a web page title, a logged question, or an
// entity with its description. Ids are content hashes, so ingestion is
// idempotent.
struct KnowledgeEntry {
    std::string id;
    Source source = Source::web;
    std::string text;
    std::optional<std::string> description;  // required for entity entries
    std::optional<std::int64_t> frequency;   // required for log entries, >= 5 kept
};

std::string entry_content_id(Source source, std::string_view text,
                             const std::optional<std::string>& description,
                             const std::optional<std::int64_t>& frequency);

struct IngestStats {
    std::size_t kept = 0;
    std::size_t dropped_low_frequency = 0;
    std::size_t duplicates = 0;
};

// Corpus schema, one JSON object per line:
//   {"text": string, "frequency"?: integer, "description"?: string}
// Log entries with frequency < 5 are dropped and counted. Malformed lines and
// missing required fields raise ValidationError with the line number.
std::vector<KnowledgeEntry> ingest_jsonl(const std::filesystem::path& path, Source source,
                                         IngestStats* stats = nullptr);

// Immutable entry collection shared by the indexes. Ordinals are positions in
// ingestion order; ids stay the stable cross-run identifiers.
class EntryStore {
  public:
    EntryStore() = default;
    explicit EntryStore(std::vector<KnowledgeEntry> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const KnowledgeEntry& entry(std::uint32_t ord) const { return entries_[ord]; }
    std::span<const KnowledgeEntry> entries() const { return entries_; }
    std::size_t duplicates_dropped() const { return duplicates_dropped_; }

    std::optional<std::uint32_t> find(std::string_view id) const;

    void save(const std::filesystem::path& path) const;
    static EntryStore load(const std::filesystem::path& path);

  private:
    std::vector<KnowledgeEntry> entries_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
    std::size_t duplicates_dropped_ = 0;
};

enum class ErrorType {
    phonetic,
    graphemic,
    missing_word,
    wrong_order,
    repeating_word,
    ill_expression,
};

std::string_view error_type_name(ErrorType type);
ErrorType parse_error_type(std::string_view name);

// Character -> alternative characters, applied by the graphemic and
// ill-expression injectors.
using ConfusionTable = std::unordered_map<char32_t, std::u32string>;

ConfusionTable load_confusion_table(const std::filesystem::path& path);

struct ErrorSpec {
    ErrorType error_type = ErrorType::phonetic;
    std::uint64_t seed = 0;
    ConfusionTable graphemic;
    ConfusionTable ill_expression;
};

struct InjectResult {
    std::string text;
    bool applied = false;  // false: no applicable site, text returned unchanged
};

// Deterministically corrupts text according to the error type: one homophone
// substitution (phonetic), one confusion-table substitution (graphemic /
// ill_expression), one deletion (missing_word), one duplication
// (repeating_word), or adjacent-span swaps (wrong_order). The seed indexes
// into the enumerated applicable sites, so equal (text, spec) always yields
// equal output.
InjectResult inject_error(std::string_view text, const ErrorSpec& spec,
                          const PinyinTable& table);

}  // namespace qrag
