#include "qrag/phonetic_index.hpp"

#include <unordered_set>

#include "qrag/error.hpp"
#include "qrag/snapshot.hpp"
#include "qrag/textdist.hpp"

namespace qrag {

namespace {

constexpr char kGramJoin = '\x1f';

std::vector<std::string> token_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
    std::vector<std::string> grams;
    if (tokens.empty()) return grams;
    auto join = [&](std::size_t from, std::size_t to) {
        std::string gram;
        for (std::size_t i = from; i < to; ++i) {
            if (i > from) gram += kGramJoin;
            gram += tokens[i];
        }
        return gram;
    };
    if (tokens.size() < n) {
        grams.push_back(join(0, tokens.size()));
        return grams;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) grams.push_back(join(i, i + n));
    return grams;
}

nlohmann::json rules_to_json(const FuzzyRules& r) {
    return {{"zh_z", r.zh_z},         {"ch_c", r.ch_c},
            {"sh_s", r.sh_s},         {"n_l", r.n_l},
            {"f_h", r.f_h},           {"an_ang", r.an_ang},
            {"en_eng", r.en_eng},     {"in_ing", r.in_ing},
            {"ian_iang", r.ian_iang}, {"uan_uang", r.uan_uang},
            {"tone_sensitive", r.tone_sensitive}};
}

FuzzyRules rules_from_json(const nlohmann::json& j) {
    FuzzyRules r;
    r.zh_z = j.at("zh_z").get<bool>();
    r.ch_c = j.at("ch_c").get<bool>();
    r.sh_s = j.at("sh_s").get<bool>();
    r.n_l = j.at("n_l").get<bool>();
    r.f_h = j.at("f_h").get<bool>();
    r.an_ang = j.at("an_ang").get<bool>();
    r.en_eng = j.at("en_eng").get<bool>();
    r.in_ing = j.at("in_ing").get<bool>();
    r.ian_iang = j.at("ian_iang").get<bool>();
    r.uan_uang = j.at("uan_uang").get<bool>();
    r.tone_sensitive = j.at("tone_sensitive").get<bool>();
    return r;
}

}  // namespace

void PhoneticIndex::rebuild_postings() {
    postings_.clear();
    for (std::uint32_t ord = 0; ord < sequences_.size(); ++ord) {
        std::unordered_set<std::string> seen;
        for (std::string& gram : token_ngrams(sequences_[ord], n_)) {
            if (seen.insert(gram).second) postings_[gram].push_back(ord);
        }
    }
}

PhoneticIndex PhoneticIndex::build(const EntryStore& store, const PinyinTable& table,
                                   const FuzzyRules& rules, std::size_t n) {
    if (n < 1) throw ValidationError("phonetic index: gram size must be >= 1");
    PhoneticIndex index;
    index.n_ = n;
    index.rules_ = rules;
    for (std::uint32_t ord = 0; ord < store.size(); ++ord) {
        const KnowledgeEntry& entry = store.entry(ord);
        index.entry_ids_.push_back(entry.id);
        index.sequences_.push_back(canonical_syllables(entry.text, table, rules));
    }
    index.rebuild_postings();
    return index;
}

std::vector<ScoredHit> PhoneticIndex::search(std::string_view query, const PinyinTable& table,
                                             std::size_t k) const {
    if (k < 1) throw ValidationError("phonetic search: k must be >= 1");
    std::vector<ScoredHit> hits;
    if (entry_ids_.empty()) return hits;

    std::vector<std::string> tokens = canonical_syllables(query, table, rules_);
    std::unordered_set<std::uint32_t> candidates;
    for (const std::string& gram : token_ngrams(tokens, n_)) {
        auto it = postings_.find(gram);
        if (it == postings_.end()) continue;
        candidates.insert(it->second.begin(), it->second.end());
    }

    hits.reserve(candidates.size());
    for (std::uint32_t ord : candidates) {
        DistancePair d = normalized_distance_seq<std::string>(tokens, sequences_[ord]);
        hits.push_back({entry_ids_[ord], 1.0 - d.normalized});
    }
    sort_hits(hits);
    truncate_hits(hits, k);
    return hits;
}

void PhoneticIndex::save(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "phonetic_index";
    doc["n"] = n_;
    doc["rules"] = rules_to_json(rules_);
    doc["entry_ids"] = entry_ids_;
    doc["sequences"] = sequences_;
    write_json_file(doc, path);
}

PhoneticIndex PhoneticIndex::load(const std::filesystem::path& path) {
    nlohmann::json doc = read_json_file(path);
    check_snapshot_header(doc, "phonetic_index");
    PhoneticIndex index;
    index.n_ = doc["n"].get<std::size_t>();
    index.rules_ = rules_from_json(doc["rules"]);
    index.entry_ids_ = doc["entry_ids"].get<std::vector<std::string>>();
    index.sequences_ = doc["sequences"].get<std::vector<std::vector<std::string>>>();
    index.rebuild_postings();
    return index;
}

}  // namespace qrag
