#include <doctest.h>

#include <set>

#include "qrag/error.hpp"
#include "qrag/knowledge.hpp"
#include "qrag/textdist.hpp"
#include "qrag/unicode.hpp"

#include "support.hpp"

using namespace qrag;
using testsupport::TempDir;
using testsupport::pinyin_table;
using testsupport::write_file;

TEST_CASE("source names round-trip") {
    for (Source s : {Source::web, Source::log, Source::entity})
        CHECK(parse_source(source_name(s)) == s);
    CHECK_THROWS_AS(parse_source("blog"), ValidationError);
}

TEST_CASE("ingest_jsonl keeps frequent log questions and drops rare ones") {
    TempDir dir;
    write_file(dir.file("log.jsonl"),
               "{\"text\": \"湖南师大怎么走\", \"frequency\": 12}\n"
               "{\"text\": \"湖南师大地铁站在哪\", \"frequency\": 4}\n"
               "\n"
               "{\"text\": \"到湖南师大怎么走\", \"frequency\": 5}\n");
    IngestStats stats;
    auto entries = ingest_jsonl(dir.file("log.jsonl"), Source::log, &stats);

    REQUIRE(entries.size() == 2);
    CHECK(entries[0].text == "湖南师大怎么走");
    CHECK(entries[0].frequency == 12);
    CHECK(entries[0].source == Source::log);
    CHECK(entries[1].text == "到湖南师大怎么走");
    CHECK(stats.kept == 2);
    CHECK(stats.dropped_low_frequency == 1);
    CHECK(stats.duplicates == 0);
}

TEST_CASE("ingest_jsonl validates required fields with line numbers") {
    TempDir dir;

    auto expect_line = [&](const std::string& name, const std::string& content, Source source,
                           const char* needle) {
        write_file(dir.file(name), content);
        CHECK_THROWS_AS(ingest_jsonl(dir.file(name), source), ValidationError);
        try {
            ingest_jsonl(dir.file(name), source);
        } catch (const ValidationError& e) {
            std::string what = e.what();
            CHECK(what.find(needle) != std::string::npos);
        }
    };

    // Messages carry the offending line as path:line. Log entries need a
    // non-negative integer frequency.
    expect_line("nofreq.jsonl", "{\"text\": \"问界M5\"}\n", Source::log, ":1:");
    expect_line("chain.jsonl",
                "{\"text\": \"a\", \"frequency\": 9}\n{\"text\": \"b\", \"frequency\": -1}\n",
                Source::log, ":2:");
    expect_line("floatfreq.jsonl", "{\"text\": \"a\", \"frequency\": 1.5}\n", Source::log, ":1:");
    // Entity entries need a non-empty description.
    expect_line("nodesc.jsonl", "{\"text\": \"默克多\"}\n", Source::entity, ":1:");
    expect_line("emptydesc.jsonl", "{\"text\": \"默克多\", \"description\": \"\"}\n",
                Source::entity, ":1:");
    // Everything needs non-empty text and valid JSON.
    expect_line("notext.jsonl", "{\"description\": \"x\"}\n", Source::web, ":1:");
    expect_line("badjson.jsonl", "{\"text\": \"ok\"}\n{oops\n", Source::web, ":2:");

    CHECK_THROWS_AS(ingest_jsonl(dir.file("absent.jsonl"), Source::web), IoError);
}

TEST_CASE("ingest_jsonl accepts entity descriptions and web titles") {
    TempDir dir;
    write_file(dir.file("entity.jsonl"),
               "{\"text\": \"默克多\", \"description\": \"默克多也就是鲁伯特·默多克\"}\n");
    auto entities = ingest_jsonl(dir.file("entity.jsonl"), Source::entity);
    REQUIRE(entities.size() == 1);
    CHECK(entities[0].description == std::string("默克多也就是鲁伯特·默多克"));

    write_file(dir.file("web.jsonl"), "{\"text\": \"湖南大学正门怎么走\"}\r\n");
    auto web = ingest_jsonl(dir.file("web.jsonl"), Source::web);
    REQUIRE(web.size() == 1);
    CHECK(web[0].text == "湖南大学正门怎么走");  // CRLF stripped
    CHECK_FALSE(web[0].frequency.has_value());
}

TEST_CASE("ingestion is idempotent: equal content, equal ids") {
    TempDir dir;
    const std::string body =
        "{\"text\": \"湖南师大怎么走\", \"frequency\": 12}\n"
        "{\"text\": \"到湖南师大怎么走\", \"frequency\": 8}\n";
    write_file(dir.file("a.jsonl"), body);
    write_file(dir.file("b.jsonl"), body);
    auto first = ingest_jsonl(dir.file("a.jsonl"), Source::log);
    auto second = ingest_jsonl(dir.file("b.jsonl"), Source::log);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].id == second[i].id);

    // Same text under a different source or frequency gets a different id.
    CHECK(entry_content_id(Source::web, "湖南师大怎么走", std::nullopt, std::nullopt) !=
          entry_content_id(Source::log, "湖南师大怎么走", std::nullopt, 12));
    CHECK(entry_content_id(Source::log, "湖南师大怎么走", std::nullopt, 12) !=
          entry_content_id(Source::log, "湖南师大怎么走", std::nullopt, 13));
    CHECK(first[0].id != first[1].id);
}

TEST_CASE("duplicate lines collapse to one entry") {
    TempDir dir;
    write_file(dir.file("dup.jsonl"),
               "{\"text\": \"x\"}\n{\"text\": \"y\"}\n{\"text\": \"x\"}\n");
    IngestStats stats;
    auto entries = ingest_jsonl(dir.file("dup.jsonl"), Source::web, &stats);
    CHECK(entries.size() == 2);
    CHECK(stats.kept == 2);
    CHECK(stats.duplicates == 1);
}

TEST_CASE("EntryStore finds by id and survives save/load") {
    TempDir dir;
    std::vector<KnowledgeEntry> entries;
    KnowledgeEntry web;
    web.source = Source::web;
    web.text = "湖南大学正门怎么走";
    web.id = entry_content_id(web.source, web.text, web.description, web.frequency);
    entries.push_back(web);
    KnowledgeEntry ent;
    ent.source = Source::entity;
    ent.text = "湖南师大";
    ent.description = "湖南师范大学";
    ent.id = entry_content_id(ent.source, ent.text, ent.description, ent.frequency);
    entries.push_back(ent);
    entries.push_back(web);  // duplicate, dropped by the store

    EntryStore store(entries);
    CHECK(store.size() == 2);
    CHECK(store.duplicates_dropped() == 1);
    REQUIRE(store.find(ent.id).has_value());
    CHECK(*store.find(ent.id) == 1);
    CHECK(store.entry(1).description == std::string("湖南师范大学"));
    CHECK_FALSE(store.find("no-such-id").has_value());

    store.save(dir.file("store.json"));
    EntryStore loaded = EntryStore::load(dir.file("store.json"));
    REQUIRE(loaded.size() == store.size());
    for (std::uint32_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded.entry(i).id == store.entry(i).id);
        CHECK(loaded.entry(i).source == store.entry(i).source);
        CHECK(loaded.entry(i).text == store.entry(i).text);
        CHECK(loaded.entry(i).description == store.entry(i).description);
        CHECK(loaded.entry(i).frequency == store.entry(i).frequency);
    }

    // Saving twice produces identical bytes.
    store.save(dir.file("again.json"));
    CHECK(testsupport::read_file(dir.file("store.json")) ==
          testsupport::read_file(dir.file("again.json")));
}

TEST_CASE("EntryStore::load rejects other snapshot kinds") {
    TempDir dir;
    write_file(dir.file("wrong.json"), "{\"schema_version\": 1, \"kind\": \"lexical_index\"}");
    CHECK_THROWS_AS(EntryStore::load(dir.file("wrong.json")), ValidationError);
}

TEST_CASE("load_confusion_table parses and merges") {
    TempDir dir;
    write_file(dir.file("conf.tsv"),
               "# graphemic confusions\n"
               "0\tO\n"
               "1\tIl\n"
               "1\t|\n");
    ConfusionTable table = load_confusion_table(dir.file("conf.tsv"));
    CHECK(table.size() == 2);
    CHECK(table.at(U'0') == U"O");
    CHECK(table.at(U'1') == U"Il|");

    write_file(dir.file("badkey.tsv"), "ab\tcd\n");
    CHECK_THROWS_AS(load_confusion_table(dir.file("badkey.tsv")), ValidationError);
}

TEST_CASE("error type names round-trip") {
    for (ErrorType t : {ErrorType::phonetic, ErrorType::graphemic, ErrorType::missing_word,
                        ErrorType::wrong_order, ErrorType::repeating_word,
                        ErrorType::ill_expression})
        CHECK(parse_error_type(error_type_name(t)) == t);
    CHECK_THROWS_AS(parse_error_type("typo"), ValidationError);
}

TEST_CASE("inject_error phonetic swaps one character for a homophone") {
    const PinyinTable& table = pinyin_table();
    ErrorSpec spec;
    spec.error_type = ErrorType::phonetic;

    bool saw_shida_variant = false;
    for (std::uint64_t seed = 0; seed < 256; ++seed) {
        spec.seed = seed;
        InjectResult r = inject_error("师大", spec, table);
        REQUIRE(r.applied);
        CHECK(r.text != "师大");
        CHECK(levenshtein(r.text, "师大") == 1);
        CHECK(phonetic_equal(r.text, "师大", table));
        if (r.text == "市大") saw_shida_variant = true;
    }
    CHECK(saw_shida_variant);
}

TEST_CASE("inject_error missing_word deletes one character") {
    const PinyinTable& table = pinyin_table();
    ErrorSpec spec;
    spec.error_type = ErrorType::missing_word;
    spec.seed = 0;
    InjectResult r = inject_error("问界M5", spec, table);
    REQUIRE(r.applied);
    CHECK(r.text == "界M5");
    CHECK(levenshtein(r.text, "问界M5") == 1);

    spec.seed = 1;
    CHECK(inject_error("问界M5", spec, table).text == "问M5");

    // Deletion needs at least two characters to leave a question behind.
    CHECK_THROWS_AS(inject_error("界", spec, table), ValidationError);
    CHECK_THROWS_AS(inject_error("", spec, table), ValidationError);
}

TEST_CASE("inject_error repeating_word duplicates one character") {
    const PinyinTable& table = pinyin_table();
    ErrorSpec spec;
    spec.error_type = ErrorType::repeating_word;
    spec.seed = 0;
    InjectResult r = inject_error("哈马斯", spec, table);
    REQUIRE(r.applied);
    CHECK(r.text == "哈哈马斯");
    CHECK(levenshtein(r.text, "哈马斯") == 1);

    spec.seed = 1;
    CHECK(inject_error("哈马斯", spec, table).text == "哈马马斯");
}

TEST_CASE("inject_error wrong_order reaches the swapped form") {
    const PinyinTable& table = pinyin_table();
    ErrorSpec spec;
    spec.error_type = ErrorType::wrong_order;

    // Every variant permutes the original characters without changing counts.
    std::multiset<char32_t> original;
    for (char32_t c : decode_utf8("哈弗车有纯电版吗")) original.insert(c);
    bool saw_golden = false;
    for (std::uint64_t seed = 0; seed < 256; ++seed) {
        spec.seed = seed;
        InjectResult r = inject_error("哈弗车有纯电版吗", spec, table);
        REQUIRE(r.applied);
        CHECK(r.text != "哈弗车有纯电版吗");
        std::multiset<char32_t> permuted;
        for (char32_t c : decode_utf8(r.text)) permuted.insert(c);
        CHECK(permuted == original);
        if (r.text == "有哈弗车吗纯电版") saw_golden = true;
    }
    CHECK(saw_golden);

    CHECK_THROWS_AS(inject_error("界", spec, table), ValidationError);
}

TEST_CASE("inject_error graphemic and ill_expression use their tables") {
    const PinyinTable& table = pinyin_table();
    ErrorSpec spec;
    spec.error_type = ErrorType::graphemic;
    spec.graphemic[U'O'] = U"0";
    spec.graphemic[U'1'] = U"Il";
    spec.seed = 0;

    InjectResult r = inject_error("问界M5还有O1的大定吗", spec, table);
    REQUIRE(r.applied);
    CHECK(r.text == "问界M5还有01的大定吗");
    CHECK(levenshtein(r.text, "问界M5还有O1的大定吗") == 1);

    // Seeds walk sites first, then candidates within a site.
    spec.seed = 1;
    CHECK(inject_error("问界M5还有O1的大定吗", spec, table).text == "问界M5还有OI的大定吗");
    spec.seed = 3;
    CHECK(inject_error("问界M5还有O1的大定吗", spec, table).text == "问界M5还有Ol的大定吗");

    spec.error_type = ErrorType::ill_expression;
    spec.ill_expression[U'M'] = U"N";
    spec.seed = 0;
    CHECK(inject_error("SM爆了", spec, table).text == "SN爆了");

    // No confusable character present -> unchanged.
    spec.seed = 7;
    InjectResult none = inject_error("湖南", spec, table);
    CHECK_FALSE(none.applied);
    CHECK(none.text == "湖南");
}

TEST_CASE("inject_error is deterministic in (text, type, seed)") {
    const PinyinTable& table = pinyin_table();
    for (ErrorType type : {ErrorType::phonetic, ErrorType::missing_word, ErrorType::wrong_order,
                           ErrorType::repeating_word}) {
        ErrorSpec spec;
        spec.error_type = type;
        for (std::uint64_t seed : {0ULL, 1ULL, 17ULL, 123456789ULL}) {
            spec.seed = seed;
            InjectResult a = inject_error("哈弗车有纯电版吗", spec, table);
            InjectResult b = inject_error("哈弗车有纯电版吗", spec, table);
            CHECK(a.applied == b.applied);
            CHECK(a.text == b.text);
        }
    }
}

TEST_CASE("inject_error edit patterns match their type") {
    const PinyinTable& table = pinyin_table();
    const std::string text = "湖南师大怎么走";
    const std::size_t n = decode_utf8(text).size();

    for (std::uint64_t seed = 0; seed < 32; ++seed) {
        ErrorSpec spec;
        spec.seed = seed;

        spec.error_type = ErrorType::phonetic;
        InjectResult ph = inject_error(text, spec, table);
        REQUIRE(ph.applied);
        CHECK(levenshtein(ph.text, text) == 1);
        CHECK(decode_utf8(ph.text).size() == n);  // substitution keeps length

        spec.error_type = ErrorType::missing_word;
        InjectResult del = inject_error(text, spec, table);
        REQUIRE(del.applied);
        CHECK(levenshtein(del.text, text) == 1);
        CHECK(decode_utf8(del.text).size() == n - 1);

        spec.error_type = ErrorType::repeating_word;
        InjectResult ins = inject_error(text, spec, table);
        REQUIRE(ins.applied);
        CHECK(levenshtein(ins.text, text) == 1);
        CHECK(decode_utf8(ins.text).size() == n + 1);
    }
}
