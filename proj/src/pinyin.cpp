#include "qrag/pinyin.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "qrag/error.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

namespace {

bool valid_syllable(std::string_view s) {
    if (s.size() < 2) return false;
    char tone = s.back();
    if (tone < '0' || tone > '5') return false;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        char c = s[i];
        if (c < 'a' || c > 'z') return false;
    }
    return true;
}

std::string strip_tone(std::string_view syllable) {
    if (!syllable.empty() && syllable.back() >= '0' && syllable.back() <= '5') {
        return std::string(syllable.substr(0, syllable.size() - 1));
    }
    return std::string(syllable);
}

// Longest-match initials, two-letter ones first.
constexpr std::array<std::string_view, 24> kInitials = {
    "zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l", "g",
    "k",  "h",  "j",  "q", "x", "r", "z", "c", "s", "y", "w",
};

}  // namespace

void PinyinTable::add(char32_t ch, const std::vector<std::string>& readings) {
    auto& existing = readings_[ch];
    bool was_empty = existing.empty();
    for (const auto& r : readings) {
        if (std::find(existing.begin(), existing.end(), r) == existing.end()) {
            existing.push_back(r);
        }
    }
    if (was_empty && !existing.empty()) {
        by_base_syllable_[strip_tone(existing.front())].push_back(ch);
    }
}

const std::vector<std::string>* PinyinTable::readings(char32_t ch) const {
    auto it = readings_.find(ch);
    return it == readings_.end() ? nullptr : &it->second;
}

std::optional<std::string> PinyinTable::first_reading(char32_t ch) const {
    auto it = readings_.find(ch);
    if (it == readings_.end() || it->second.empty()) return std::nullopt;
    return it->second.front();
}

std::vector<char32_t> PinyinTable::homophones(char32_t ch) const {
    auto first = first_reading(ch);
    if (!first) return {};
    auto it = by_base_syllable_.find(strip_tone(*first));
    if (it == by_base_syllable_.end()) return {};
    std::vector<char32_t> out;
    for (char32_t c : it->second) {
        if (c != ch) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PinyinTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("pinyin table: cannot open " + path.string());
    PinyinTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ValidationError("pinyin table: missing TAB at line " + std::to_string(lineno));
        }
        std::vector<char32_t> key = decode_utf8(line.substr(0, tab));
        if (key.size() != 1) {
            throw ValidationError("pinyin table: key is not a single character at line " +
                                  std::to_string(lineno));
        }
        std::vector<std::string> readings;
        std::string_view rest = std::string_view(line).substr(tab + 1);
        while (!rest.empty()) {
            std::size_t comma = rest.find(',');
            std::string_view syl = rest.substr(0, comma);
            if (!valid_syllable(syl)) {
                throw ValidationError("pinyin table: bad syllable '" + std::string(syl) +
                                      "' at line " + std::to_string(lineno));
            }
            readings.push_back(std::string(syl));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (readings.empty()) {
            throw ValidationError("pinyin table: no readings at line " + std::to_string(lineno));
        }
        table.add(key[0], readings);
    }
    return table;
}

FuzzyRules FuzzyRules::all_enabled() {
    FuzzyRules r;
    r.zh_z = r.ch_c = r.sh_s = r.n_l = r.f_h = true;
    r.an_ang = r.en_eng = r.in_ing = r.ian_iang = r.uan_uang = true;
    return r;
}

std::optional<SyllableParts> parse_syllable(std::string_view syllable) {
    SyllableParts parts;
    std::string_view body = syllable;
    if (!body.empty() && body.back() >= '0' && body.back() <= '5') {
        parts.tone = body.back() - '0';
        body.remove_suffix(1);
    }
    if (body.empty()) return std::nullopt;
    for (char c : body) {
        if (c < 'a' || c > 'z') return std::nullopt;
    }
    for (std::string_view init : kInitials) {
        if (body.size() >= init.size() && body.substr(0, init.size()) == init) {
            parts.initial = std::string(init);
            body.remove_prefix(init.size());
            break;
        }
    }
    if (body.empty()) return std::nullopt;  // an initial alone is not a syllable
    parts.final = std::string(body);
    return parts;
}

FuzzyResult fuzzy_normalize(std::string_view syllable, const FuzzyRules& rules) {
    auto parts = parse_syllable(syllable);
    if (!parts) return {std::string(syllable), false};

    auto& initial = parts->initial;
    if (rules.zh_z && initial == "zh") initial = "z";
    if (rules.ch_c && initial == "ch") initial = "c";
    if (rules.sh_s && initial == "sh") initial = "s";
    if (rules.n_l && initial == "l") initial = "n";
    if (rules.f_h && initial == "h") initial = "f";

    auto& fin = parts->final;
    if (rules.an_ang && fin == "ang") fin = "an";
    if (rules.en_eng && fin == "eng") fin = "en";
    if (rules.in_ing && fin == "ing") fin = "in";
    if (rules.ian_iang && fin == "iang") fin = "ian";
    if (rules.uan_uang && fin == "uang") fin = "uan";

    std::string out = initial + fin;
    if (parts->tone >= 0) out.push_back(static_cast<char>('0' + parts->tone));
    return {out, true};
}

Syllabification to_syllables(std::string_view text, const PinyinTable& table,
                             bool tone_sensitive) {
    Syllabification result;
    std::vector<char32_t> chars = decode_utf8(text);
    result.tokens.reserve(chars.size());
    for (char32_t ch : chars) {
        if (is_han(ch)) {
            auto reading = table.first_reading(ch);
            if (reading) {
                std::string syl = tone_sensitive ? *reading : strip_tone(*reading);
                result.tokens.push_back({std::move(syl), true});
                continue;
            }
            result.unknown.push_back(encode_utf8(ch));
        }
        result.tokens.push_back({encode_utf8(ch), false});
    }
    return result;
}

std::vector<std::string> canonical_syllables(std::string_view text, const PinyinTable& table,
                                             const FuzzyRules& rules) {
    Syllabification syl = to_syllables(text, table, rules.tone_sensitive);
    std::vector<std::string> out;
    out.reserve(syl.tokens.size());
    for (const auto& token : syl.tokens) {
        if (token.is_syllable) {
            out.push_back(fuzzy_normalize(token.text, rules).syllable);
        } else {
            out.push_back(token.text);
        }
    }
    return out;
}

bool phonetic_equal(std::string_view a, std::string_view b, const PinyinTable& table,
                    const FuzzyRules& rules) {
    return canonical_syllables(a, table, rules) == canonical_syllables(b, table, rules);
}

}  // namespace qrag
