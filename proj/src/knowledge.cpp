#include "qrag/knowledge.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "qrag/error.hpp"
#include "qrag/hashing.hpp"
#include "qrag/snapshot.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

namespace {

constexpr std::int64_t kMinLogFrequency = 5;
constexpr char kIdSeparator = '\x1f';

}  // namespace

std::string_view source_name(Source source) {
    switch (source) {
        case Source::web: return "web";
        case Source::log: return "log";
        case Source::entity: return "entity";
    }
    return "web";
}

Source parse_source(std::string_view name) {
    if (name == "web") return Source::web;
    if (name == "log") return Source::log;
    if (name == "entity") return Source::entity;
    throw ValidationError("unknown source '" + std::string(name) + "'");
}

std::string entry_content_id(Source source, std::string_view text,
                             const std::optional<std::string>& description,
                             const std::optional<std::int64_t>& frequency) {
    std::string blob;
    blob += source_name(source);
    blob += kIdSeparator;
    blob += text;
    blob += kIdSeparator;
    if (description) blob += *description;
    blob += kIdSeparator;
    if (frequency) blob += std::to_string(*frequency);
    return to_hex64(fnv1a64(blob));
}

std::vector<KnowledgeEntry> ingest_jsonl(const std::filesystem::path& path, Source source,
                                         IngestStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("corpus: cannot open " + path.string());

    std::vector<KnowledgeEntry> entries;
    std::unordered_map<std::string, bool> seen;
    IngestStats local;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim_view(line).empty()) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        auto fail = [&](const std::string& why) -> ValidationError {
            return ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + why);
        };
        if (!obj.is_object()) throw fail("expected a JSON object");
        if (!obj.contains("text") || !obj["text"].is_string()) {
            throw fail("missing string field 'text'");
        }

        KnowledgeEntry entry;
        entry.source = source;
        entry.text = obj["text"].get<std::string>();
        if (entry.text.empty()) throw fail("'text' must be non-empty");

        if (source == Source::log) {
            if (!obj.contains("frequency") || !obj["frequency"].is_number_integer()) {
                throw fail("log entry missing integer field 'frequency'");
            }
            std::int64_t freq = obj["frequency"].get<std::int64_t>();
            if (freq < 0) throw fail("'frequency' must be non-negative");
            if (freq < kMinLogFrequency) {
                ++local.dropped_low_frequency;
                continue;
            }
            entry.frequency = freq;
        }
        if (source == Source::entity) {
            if (!obj.contains("description") || !obj["description"].is_string() ||
                obj["description"].get<std::string>().empty()) {
                throw fail("entity entry missing non-empty field 'description'");
            }
            entry.description = obj["description"].get<std::string>();
        } else if (obj.contains("description") && obj["description"].is_string()) {
            entry.description = obj["description"].get<std::string>();
        }

        entry.id = entry_content_id(entry.source, entry.text, entry.description, entry.frequency);
        if (seen.count(entry.id)) {
            ++local.duplicates;
            continue;
        }
        seen[entry.id] = true;
        ++local.kept;
        entries.push_back(std::move(entry));
    }
    if (stats) *stats = local;
    return entries;
}

EntryStore::EntryStore(std::vector<KnowledgeEntry> entries) {
    entries_.reserve(entries.size());
    for (auto& entry : entries) {
        auto [it, inserted] =
            by_id_.emplace(entry.id, static_cast<std::uint32_t>(entries_.size()));
        if (!inserted) {
            ++duplicates_dropped_;
            continue;
        }
        entries_.push_back(std::move(entry));
    }
}

std::optional<std::uint32_t> EntryStore::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

void EntryStore::save(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "entry_store";
    nlohmann::json list = nlohmann::json::array();
    for (const auto& entry : entries_) {
        nlohmann::json e;
        e["id"] = entry.id;
        e["source"] = std::string(source_name(entry.source));
        e["text"] = entry.text;
        if (entry.description) e["description"] = *entry.description;
        if (entry.frequency) e["frequency"] = *entry.frequency;
        list.push_back(std::move(e));
    }
    doc["entries"] = std::move(list);
    write_json_file(doc, path);
}

EntryStore EntryStore::load(const std::filesystem::path& path) {
    nlohmann::json doc = read_json_file(path);
    check_snapshot_header(doc, "entry_store");
    std::vector<KnowledgeEntry> entries;
    for (const auto& e : doc["entries"]) {
        KnowledgeEntry entry;
        entry.id = e["id"].get<std::string>();
        entry.source = parse_source(e["source"].get<std::string>());
        entry.text = e["text"].get<std::string>();
        if (e.contains("description")) entry.description = e["description"].get<std::string>();
        if (e.contains("frequency")) entry.frequency = e["frequency"].get<std::int64_t>();
        entries.push_back(std::move(entry));
    }
    return EntryStore(std::move(entries));
}

std::string_view error_type_name(ErrorType type) {
    switch (type) {
        case ErrorType::phonetic: return "phonetic";
        case ErrorType::graphemic: return "graphemic";
        case ErrorType::missing_word: return "missing_word";
        case ErrorType::wrong_order: return "wrong_order";
        case ErrorType::repeating_word: return "repeating_word";
        case ErrorType::ill_expression: return "ill_expression";
    }
    return "phonetic";
}

ErrorType parse_error_type(std::string_view name) {
    if (name == "phonetic") return ErrorType::phonetic;
    if (name == "graphemic") return ErrorType::graphemic;
    if (name == "missing_word") return ErrorType::missing_word;
    if (name == "wrong_order") return ErrorType::wrong_order;
    if (name == "repeating_word") return ErrorType::repeating_word;
    if (name == "ill_expression") return ErrorType::ill_expression;
    throw ValidationError("unknown error type '" + std::string(name) + "'");
}

ConfusionTable load_confusion_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("confusion table: cannot open " + path.string());
    ConfusionTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ValidationError("confusion table: missing TAB at line " +
                                  std::to_string(lineno));
        }
        std::vector<char32_t> key = decode_utf8(line.substr(0, tab));
        std::vector<char32_t> alts = decode_utf8(line.substr(tab + 1));
        if (key.size() != 1 || alts.empty()) {
            throw ValidationError("confusion table: bad record at line " +
                                  std::to_string(lineno));
        }
        auto& existing = table[key[0]];
        for (char32_t alt : alts) {
            if (alt != key[0] &&
                std::find(existing.begin(), existing.end(), alt) == existing.end()) {
                existing.push_back(alt);
            }
        }
    }
    return table;
}

namespace {

struct SubstitutionSite {
    std::size_t position;
    std::vector<char32_t> candidates;
};

InjectResult substitute(const std::vector<char32_t>& chars,
                        const std::vector<SubstitutionSite>& sites, std::uint64_t seed) {
    if (sites.empty()) return {encode_utf8(chars), false};
    const SubstitutionSite& site = sites[seed % sites.size()];
    char32_t replacement = site.candidates[(seed / sites.size()) % site.candidates.size()];
    std::vector<char32_t> out = chars;
    out[site.position] = replacement;
    return {encode_utf8(out), true};
}

InjectResult substitute_from_confusions(const std::vector<char32_t>& chars,
                                        const ConfusionTable& confusions, std::uint64_t seed) {
    std::vector<SubstitutionSite> sites;
    for (std::size_t i = 0; i < chars.size(); ++i) {
        auto it = confusions.find(chars[i]);
        if (it != confusions.end() && !it->second.empty()) {
            sites.push_back({i, {it->second.begin(), it->second.end()}});
        }
    }
    return substitute(chars, sites, seed);
}

// Adjacent-span swap sites. Single swaps exchange [a,b) and [b,c); double
// swaps exchange a prefix pair and a suffix pair in one shot, which covers
// scrambles like a question frame moving around its content words.
std::vector<std::vector<char32_t>> wrong_order_variants(const std::vector<char32_t>& chars) {
    const std::size_t n = chars.size();
    std::vector<std::vector<char32_t>> variants;
    auto slice = [&](std::size_t from, std::size_t to) {
        return std::vector<char32_t>(chars.begin() + static_cast<std::ptrdiff_t>(from),
                                     chars.begin() + static_cast<std::ptrdiff_t>(to));
    };
    auto concat = [](std::initializer_list<std::vector<char32_t>> parts) {
        std::vector<char32_t> out;
        for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
        return out;
    };
    for (std::size_t a = 0; a + 1 < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            for (std::size_t c = b + 1; c <= n; ++c) {
                variants.push_back(concat({slice(0, a), slice(b, c), slice(a, b), slice(c, n)}));
            }
        }
    }
    for (std::size_t i = 1; i + 2 < n; ++i) {
        for (std::size_t j = i + 1; j + 1 < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                variants.push_back(
                    concat({slice(i, j), slice(0, i), slice(k, n), slice(j, k)}));
            }
        }
    }
    return variants;
}

}  // namespace

InjectResult inject_error(std::string_view text, const ErrorSpec& spec,
                          const PinyinTable& table) {
    std::vector<char32_t> chars = decode_utf8(text);
    if (chars.empty()) throw ValidationError("inject_error: empty text");

    switch (spec.error_type) {
        case ErrorType::phonetic: {
            std::vector<SubstitutionSite> sites;
            for (std::size_t i = 0; i < chars.size(); ++i) {
                if (!is_han(chars[i])) continue;
                std::vector<char32_t> homophones = table.homophones(chars[i]);
                if (!homophones.empty()) sites.push_back({i, std::move(homophones)});
            }
            return substitute(chars, sites, spec.seed);
        }
        case ErrorType::graphemic:
            return substitute_from_confusions(chars, spec.graphemic, spec.seed);
        case ErrorType::ill_expression:
            return substitute_from_confusions(chars, spec.ill_expression, spec.seed);
        case ErrorType::missing_word: {
            if (chars.size() < 2) {
                throw ValidationError("inject_error: missing_word needs length >= 2");
            }
            std::size_t pos = spec.seed % chars.size();
            std::vector<char32_t> out = chars;
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
            return {encode_utf8(out), true};
        }
        case ErrorType::repeating_word: {
            std::size_t pos = spec.seed % chars.size();
            std::vector<char32_t> out = chars;
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), chars[pos]);
            return {encode_utf8(out), true};
        }
        case ErrorType::wrong_order: {
            if (chars.size() < 2) {
                throw ValidationError("inject_error: wrong_order needs length >= 2");
            }
            std::vector<std::vector<char32_t>> variants = wrong_order_variants(chars);
            if (variants.empty()) return {encode_utf8(chars), false};
            return {encode_utf8(variants[spec.seed % variants.size()]), true};
        }
    }
    throw ValidationError("inject_error: unknown error type");
}

}  // namespace qrag
