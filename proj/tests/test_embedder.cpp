#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "qrag/embedder.hpp"
#include "qrag/error.hpp"
#include "qrag/hashing.hpp"
#include "qrag/lexical_index.hpp"
#include "qrag/vector_index.hpp"

#include "mock_server.hpp"
#include "support.hpp"

using namespace qrag;
using nlohmann::json;
using testsupport::TempDir;
using testsupport::TestServer;

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

// The documented hashing recipe, recomputed from scratch.
std::vector<double> hashing_oracle(std::string_view text, std::size_t d) {
    std::vector<double> v(d, 0.0);
    for (const std::string& gram : char_ngrams(text, 2)) {
        std::uint64_t h = fnv1a64(gram);
        v[h % d] += (h >> 63) ? -1.0 : 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
    return v;
}

}  // namespace

TEST_CASE("hashing embedder is deterministic and unit-norm") {
    HashingEmbedder embedder;
    CHECK(embedder.dimension() == 256);
    CHECK(embedder.identity() == "hashing-fnv1a64-n2-d256");

    for (std::string_view text : {"湖南师大怎么走", "问界M5", "a", "到湖南师大怎么走"}) {
        auto v = embedder.embed(text);
        REQUIRE(v.size() == 256);
        CHECK(l2_norm(v) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(v == embedder.embed(text));
        CHECK(v == hashing_oracle(text, 256));
    }

    // Identity changes with the parameters.
    CHECK(HashingEmbedder(128).identity() == "hashing-fnv1a64-n2-d128");
    CHECK(HashingEmbedder(256, 3).identity() == "hashing-fnv1a64-n3-d256");
    CHECK_THROWS_AS(HashingEmbedder(0), ValidationError);
}

TEST_CASE("empty text maps to the zero sentinel") {
    HashingEmbedder embedder;
    auto v = embedder.embed("");
    CHECK(l2_norm(v) == 0.0);
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("gram-disjoint texts are near-orthogonal") {
    HashingEmbedder embedder;
    // No shared character bigrams between the two members of each pair.
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"湖南师大怎么走", "北京天气预报"},
        {"哈弗车有纯电版吗", "默克多再婚妻子"},
        {"终南山是谁", "哈弗纯电suv价格"},
        {"问界M5的大定数量", "古道西风瘦马"},
    };
    for (const auto& [a, b] : pairs) {
        double cos = dot(embedder.embed(a), embedder.embed(b));
        CHECK(std::abs(cos) < 0.2);
    }
}

TEST_CASE("similar texts score higher than unrelated ones") {
    HashingEmbedder embedder;
    auto query = embedder.embed("湖南市大怎么走");
    double related = dot(query, embedder.embed("到湖南师大怎么走"));
    double unrelated = dot(query, embedder.embed("北京天气预报"));
    CHECK(related > unrelated);
    CHECK(related > 0.3);
}

TEST_CASE("vector index self-retrieval and ranking") {
    HashingEmbedder embedder;
    std::vector<std::string> texts = {"湖南师大怎么走", "到湖南师大怎么走", "湖南大学正门怎么走",
                                      "北京天气预报", "哈弗车有纯电版吗"};
    EntryStore store = make_store(texts);
    VectorIndex index = VectorIndex::build(store, embedder);
    CHECK(index.dimension() == 256);
    CHECK(index.doc_count() == texts.size());
    CHECK(index.embedder_identity() == embedder.identity());

    for (const auto& text : texts) {
        auto hits = index.search(text, embedder, 3);
        REQUIRE_FALSE(hits.empty());
        auto ord = store.find(hits[0].id);
        REQUIRE(ord.has_value());
        CHECK(store.entry(*ord).text == text);
        CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-6));
    }

    // Exactly min(k, corpus) hits, sorted non-increasing.
    auto all = index.search("湖南师大怎么走", embedder, 50);
    CHECK(all.size() == texts.size());
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
    CHECK(index.search("湖南师大怎么走", embedder, 2).size() == 2);
    for (const auto& h : all) {
        CHECK(h.score <= 1.0 + 1e-9);
        CHECK(h.score >= -1.0 - 1e-9);
    }
}

TEST_CASE("vector search rejects a different embedder identity") {
    HashingEmbedder a(256), b(128);
    EntryStore store = make_store({"湖南师大怎么走"});
    VectorIndex index = VectorIndex::build(store, a);

    CHECK_THROWS_AS(index.search("湖南", b, 1), ValidationError);
    try {
        index.search("湖南", b, 1);
    } catch (const ValidationError& e) {
        std::string what = e.what();
        CHECK(what.find(a.identity()) != std::string::npos);
        CHECK(what.find(b.identity()) != std::string::npos);
    }
}

TEST_CASE("zero-sentinel queries and entries never rank") {
    HashingEmbedder embedder;
    EntryStore store = make_store({"湖南师大怎么走", ""});
    VectorIndex index = VectorIndex::build(store, embedder);
    CHECK(index.doc_count() == 2);  // ordinals stay aligned

    CHECK(index.search("", embedder, 5).empty());
    auto hits = index.search("湖南师大怎么走", embedder, 5);
    CHECK(hits.size() == 1);  // the empty-text entry is unscorable
}

TEST_CASE("vector snapshot round-trips byte-stably") {
    TempDir dir;
    HashingEmbedder embedder;
    EntryStore store = make_store({"湖南师大怎么走", "北京天气预报"});
    VectorIndex index = VectorIndex::build(store, embedder);
    index.save(dir.file("vec.json"));

    VectorIndex loaded = VectorIndex::load(dir.file("vec.json"));
    CHECK(loaded.embedder_identity() == index.embedder_identity());
    CHECK(loaded.dimension() == index.dimension());
    auto a = index.search("湖南市大怎么走", embedder, 2);
    auto b = loaded.search("湖南市大怎么走", embedder, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].score == b[i].score);
    }

    loaded.save(dir.file("vec2.json"));
    CHECK(testsupport::read_file(dir.file("vec.json")) ==
          testsupport::read_file(dir.file("vec2.json")));

    // Tampered vectors fail norm validation on load.
    std::string raw = testsupport::read_file(dir.file("vec.json"));
    auto doc = json::parse(raw);
    doc["vectors"][0][0] = 5.0;
    testsupport::write_file(dir.file("bad.json"), doc.dump(2));
    CHECK_THROWS_AS(VectorIndex::load(dir.file("bad.json")), ValidationError);
}

TEST_CASE("http embedder follows the /embed contract") {
    json last_request;
    std::string last_auth;
    TestServer server([&](httplib::Server& s) {
        s.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
            last_request = json::parse(req.body);
            last_auth = req.get_header_value("Authorization");
            json vectors = json::array();
            for (const auto& text : last_request["texts"]) {
                (void)text;
                vectors.push_back({0.6, 0.8, 0.0});
            }
            res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
        });
    });

    HttpEndpoint endpoint;
    endpoint.base_url = server.url();
    endpoint.auth_token = "sesame";
    HttpEmbedder embedder(endpoint);
    CHECK(embedder.identity() == "http-embed:" + server.url());

    auto batch = embedder.embed_batch({"湖南师大", "北京"});
    CHECK(last_request == json{{"texts", {"湖南师大", "北京"}}});
    CHECK(last_auth == "Bearer sesame");
    REQUIRE(batch.size() == 2);
    CHECK(batch[0] == std::vector<double>{0.6, 0.8, 0.0});
    CHECK(embedder.dimension() == 3);

    auto single = embedder.embed("湖南师大");
    CHECK(single == std::vector<double>{0.6, 0.8, 0.0});
}

TEST_CASE("http embedder rejects malformed service responses") {
    int mode = 0;
    TestServer server([&](httplib::Server& s) {
        s.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
            json request = json::parse(req.body);
            switch (mode) {
                case 0:  // count mismatch
                    res.set_content(json{{"vectors", json::array()}}.dump(),
                                    "application/json");
                    break;
                case 1:  // not JSON
                    res.set_content("oops", "text/plain");
                    break;
                case 2:  // missing key
                    res.set_content(json{{"embeddings", json::array()}}.dump(),
                                    "application/json");
                    break;
                case 3:  // inconsistent dimension across texts
                {
                    json vectors = json::array();
                    vectors.push_back({1.0, 0.0});
                    vectors.push_back({1.0, 0.0, 0.0});
                    res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
                    break;
                }
                case 4:  // non-finite component
                    res.set_content("{\"vectors\": [[1e999, 0.0]]}", "application/json");
                    break;
                default:
                    res.status = 503;
            }
        });
    });

    HttpEndpoint endpoint;
    endpoint.base_url = server.url();
    HttpEmbedder embedder(endpoint);

    for (mode = 0; mode <= 5; ++mode) {
        CAPTURE(mode);
        if (mode == 3) {
            CHECK_THROWS_AS(embedder.embed_batch({"a b", "c d"}), BackendError);
        } else {
            CHECK_THROWS_AS(embedder.embed("湖南"), BackendError);
        }
    }
}

TEST_CASE("backend transport failures surface as BackendError") {
    HttpEndpoint endpoint;
    endpoint.base_url = "http://127.0.0.1:9";  // discard port, nothing listens
    endpoint.timeout_s = 2.0;
    HttpEmbedder embedder(endpoint);
    CHECK_THROWS_AS(embedder.embed("湖南"), BackendError);

    CHECK_THROWS_AS(HttpEmbedder(HttpEndpoint{}), ValidationError);
}
