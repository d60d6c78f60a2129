#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qrag {

// Mandarin readings per Han character, loaded from a UTF-8 TSV file with one
// record per line: character TAB comma-separated toned syllables. The first
// reading of a character is treated as its most common one and is the reading
// used for indexing.
class PinyinTable {
  public:
    void add(char32_t ch, const std::vector<std::string>& readings);

    bool contains(char32_t ch) const { return readings_.count(ch) != 0; }
    std::size_t size() const { return readings_.size(); }

    const std::vector<std::string>* readings(char32_t ch) const;
    std::optional<std::string> first_reading(char32_t ch) const;

    // Characters sharing ch's tone-stripped first reading, excluding ch
    // itself, sorted by code point.
    std::vector<char32_t> homophones(char32_t ch) const;

  private:
    std::unordered_map<char32_t, std::vector<std::string>> readings_;
    std::map<std::string, std::vector<char32_t>> by_base_syllable_;
};

PinyinTable load_table(const std::filesystem::path& path);

// Initial/final merge rules for loose phonetic matching, each toggleable.
// Canonical representatives are the shorter pair members (z c s n f / an en
// in ian uan). All rules default off; matching is tone-insensitive unless
// tone_sensitive is set.
struct FuzzyRules {
    bool zh_z = false;
    bool ch_c = false;
    bool sh_s = false;
    bool n_l = false;
    bool f_h = false;
    bool an_ang = false;
    bool en_eng = false;
    bool in_ing = false;
    bool ian_iang = false;
    bool uan_uang = false;
    bool tone_sensitive = false;

    static FuzzyRules all_enabled();
};

struct SyllableParts {
    std::string initial;  // may be empty (vowel-initial syllables)
    std::string final;
    int tone = -1;  // -1 when the syllable carries no tone digit
};

// Splits a toned or untoned syllable into initial + final (+ tone digit).
// Returns nullopt when the remainder after the initial is empty or the
// syllable contains unexpected characters.
std::optional<SyllableParts> parse_syllable(std::string_view syllable);

struct FuzzyResult {
    std::string syllable;
    bool parsed = true;  // false: input did not parse and is returned unchanged
};

// Applies the enabled initial rule first, then the final rule. Idempotent.
FuzzyResult fuzzy_normalize(std::string_view syllable, const FuzzyRules& rules);

struct PinyinToken {
    std::string text;
    bool is_syllable = false;  // false: literal passthrough (non-Han or unknown)

    bool operator==(const PinyinToken&) const = default;
};

struct Syllabification {
    std::vector<PinyinToken> tokens;
    std::vector<std::string> unknown;  // Han characters absent from the table
};

// One token per Unicode scalar value: Han characters map to their first-listed
// reading (tone digit stripped unless tone_sensitive), everything else passes
// through as a literal token. Unknown Han characters become literals and are
// reported in the unknown list.
Syllabification to_syllables(std::string_view text, const PinyinTable& table,
                             bool tone_sensitive = false);

// Fuzzy-canonical token sequence used by the phonetic index and
// phonetic_equal: tone handling per rules, then fuzzy_normalize on syllables.
std::vector<std::string> canonical_syllables(std::string_view text, const PinyinTable& table,
                                             const FuzzyRules& rules);

// True iff the fuzzy-canonicalized syllable sequences of a and b are
// identical. An equivalence relation for any fixed rule set.
bool phonetic_equal(std::string_view a, std::string_view b, const PinyinTable& table,
                    const FuzzyRules& rules = {});

}  // namespace qrag
