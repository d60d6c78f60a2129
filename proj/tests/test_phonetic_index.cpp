#include <doctest.h>

#include "qrag/error.hpp"
#include "qrag/phonetic_index.hpp"
#include "qrag/textdist.hpp"
#include "qrag/unicode.hpp"

#include "support.hpp"

using namespace qrag;
using testsupport::TempDir;
using testsupport::pinyin_table;

namespace {

EntryStore make_store(const std::vector<std::string>& texts) {
    std::vector<KnowledgeEntry> entries;
    for (const auto& text : texts) {
        KnowledgeEntry e;
        e.source = Source::web;
        e.text = text;
        e.id = entry_content_id(e.source, e.text, e.description, e.frequency);
        entries.push_back(std::move(e));
    }
    return EntryStore(std::move(entries));
}

std::string text_of(const EntryStore& store, const std::string& id) {
    auto ord = store.find(id);
    REQUIRE(ord.has_value());
    return store.entry(*ord).text;
}

}  // namespace

TEST_CASE("homophone query scores 1.0 against the original entry") {
    EntryStore store = make_store({"湖南师大", "湖南大学", "北京地铁"});
    PhoneticIndex index = PhoneticIndex::build(store, pinyin_table(), FuzzyRules{});

    auto hits = index.search("湖南市大", pinyin_table(), 3);
    REQUIRE_FALSE(hits.empty());
    CHECK(text_of(store, hits[0].id) == "湖南师大");
    CHECK(hits[0].score == doctest::Approx(1.0));

    // Full worked sentence, same behavior.
    EntryStore store2 = make_store({"湖南师大怎么走", "湖南大学正门怎么走"});
    PhoneticIndex index2 = PhoneticIndex::build(store2, pinyin_table(), FuzzyRules{});
    auto hits2 = index2.search("湖南市大怎么走", pinyin_table(), 2);
    REQUIRE_FALSE(hits2.empty());
    CHECK(text_of(store2, hits2[0].id) == "湖南师大怎么走");
    CHECK(hits2[0].score == doctest::Approx(1.0));
}

TEST_CASE("identity query is rank 1 with score 1.0") {
    std::vector<std::string> texts = {"湖南师大怎么走", "到湖南师大怎么走", "哈弗车有纯电版吗",
                                      "终南山是谁"};
    EntryStore store = make_store(texts);
    PhoneticIndex index = PhoneticIndex::build(store, pinyin_table(), FuzzyRules{});

    for (const auto& text : texts) {
        auto hits = index.search(text, pinyin_table(), 2);
        REQUIRE_FALSE(hits.empty());
        CHECK(text_of(store, hits[0].id) == text);
        CHECK(hits[0].score == doctest::Approx(1.0));
    }
}

TEST_CASE("fuzzy sh-s rule folds 四 onto 适") {
    EntryStore store = make_store({"高适和李白", "高考分数线", "李白的诗"});

    FuzzyRules off;
    PhoneticIndex strict = PhoneticIndex::build(store, pinyin_table(), off);
    auto strict_hits = strict.search("高四和李白", pinyin_table(), 3);
    // Still retrievable by overlap, but below 1.0 without the rule.
    if (!strict_hits.empty()) CHECK(strict_hits[0].score < 1.0);

    FuzzyRules loose;
    loose.sh_s = true;
    PhoneticIndex fuzzy = PhoneticIndex::build(store, pinyin_table(), loose);
    auto hits = fuzzy.search("高四和李白", pinyin_table(), 3);
    REQUIRE_FALSE(hits.empty());
    CHECK(text_of(store, hits[0].id) == "高适和李白");
    CHECK(hits[0].score == doctest::Approx(1.0));
}

TEST_CASE("any single homophone substitution keeps the score at 1.0") {
    const PinyinTable& table = pinyin_table();
    std::vector<std::string> texts = {"湖南师大怎么走", "哈弗车有纯电版吗"};
    EntryStore store = make_store(texts);
    PhoneticIndex index = PhoneticIndex::build(store, table, FuzzyRules{});

    for (const auto& text : texts) {
        std::vector<char32_t> chars = decode_utf8(text);
        for (std::size_t i = 0; i < chars.size(); ++i) {
            auto homophones = table.homophones(chars[i]);
            if (homophones.empty()) continue;
            std::vector<char32_t> variant = chars;
            variant[i] = homophones[homophones.size() / 2];
            std::string query = encode_utf8(variant);

            auto hits = index.search(query, table, 2);
            REQUIRE_FALSE(hits.empty());
            CHECK(text_of(store, hits[0].id) == text);
            CHECK(hits[0].score == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("score equals one minus normalized syllable distance") {
    EntryStore store = make_store({"湖南师大怎么走"});
    PhoneticIndex index = PhoneticIndex::build(store, pinyin_table(), FuzzyRules{});

    // 胡南市大怎么走: every syllable matches the entry (hu nan shi da zen me zou).
    auto same = index.search("胡南市大怎么走", pinyin_table(), 1);
    REQUIRE(same.size() == 1);
    CHECK(same[0].score == doctest::Approx(1.0));

    // 湖南师大怎么去: one of seven syllables differs -> 1 - 1/7.
    auto near = index.search("湖南师大怎么去", pinyin_table(), 1);
    REQUIRE(near.size() == 1);
    CHECK(near[0].score == doctest::Approx(1.0 - 1.0 / 7.0));

    // Unrelated text shares no syllable bigram -> no candidate at all.
    CHECK(index.search("北京天气", pinyin_table(), 1).empty());
}

TEST_CASE("non-Han literals must match exactly") {
    EntryStore store = make_store({"问界M5", "问界M7"});
    PhoneticIndex index = PhoneticIndex::build(store, pinyin_table(), FuzzyRules{});

    auto hits = index.search("问界M5", pinyin_table(), 2);
    REQUIRE(hits.size() == 2);
    CHECK(text_of(store, hits[0].id) == "问界M5");
    CHECK(hits[0].score == doctest::Approx(1.0));
    // Sibling model differs in one of four tokens.
    CHECK(hits[1].score == doctest::Approx(0.75));
}

TEST_CASE("empty index and empty query behave") {
    EntryStore store = make_store({});
    PhoneticIndex index = PhoneticIndex::build(store, pinyin_table(), FuzzyRules{});
    CHECK(index.search("湖南", pinyin_table(), 3).empty());

    EntryStore store2 = make_store({"湖南师大"});
    PhoneticIndex index2 = PhoneticIndex::build(store2, pinyin_table(), FuzzyRules{});
    CHECK(index2.search("", pinyin_table(), 3).empty());
}

TEST_CASE("stored sequences are fuzzy-canonical fixpoints") {
    FuzzyRules rules = FuzzyRules::all_enabled();
    EntryStore store = make_store({"湖南师大怎么走", "高适和李白", "张章成长"});
    PhoneticIndex index = PhoneticIndex::build(store, pinyin_table(), rules);

    for (std::uint32_t ord = 0; ord < store.size(); ++ord) {
        for (const std::string& token : index.syllables(ord)) {
            CHECK(fuzzy_normalize(token, rules).syllable == token);
        }
    }
}

TEST_CASE("snapshot keeps rules and results") {
    TempDir dir;
    FuzzyRules rules;
    rules.sh_s = true;
    rules.an_ang = true;
    EntryStore store = make_store({"高适和李白", "湖南师大怎么走", "长沙南站"});
    PhoneticIndex index = PhoneticIndex::build(store, pinyin_table(), rules);
    index.save(dir.file("pho.json"));

    PhoneticIndex loaded = PhoneticIndex::load(dir.file("pho.json"));
    CHECK(loaded.doc_count() == index.doc_count());
    CHECK(loaded.rules().sh_s);
    CHECK(loaded.rules().an_ang);
    CHECK_FALSE(loaded.rules().zh_z);

    for (std::string_view query : {"高四和李白", "湖南市大怎么走"}) {
        auto a = index.search(query, pinyin_table(), 3);
        auto b = loaded.search(query, pinyin_table(), 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].id == b[i].id);
            CHECK(a[i].score == b[i].score);
        }
    }

    loaded.save(dir.file("pho2.json"));
    CHECK(testsupport::read_file(dir.file("pho.json")) ==
          testsupport::read_file(dir.file("pho2.json")));
}
