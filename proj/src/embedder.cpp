#include "qrag/embedder.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "qrag/error.hpp"
#include "qrag/http_client.hpp"
#include "qrag/hashing.hpp"
#include "qrag/lexical_index.hpp"

namespace qrag {

std::vector<std::vector<double>> Embedder::embed_batch(
    const std::vector<std::string>& texts) const {
    std::vector<std::vector<double>> vectors;
    vectors.reserve(texts.size());
    for (const std::string& text : texts) vectors.push_back(embed(text));
    return vectors;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::size_t gram_size)
    : dimension_(dimension), gram_size_(gram_size) {
    if (dimension_ < 1) throw ValidationError("hashing embedder: dimension must be >= 1");
    if (gram_size_ < 1) throw ValidationError("hashing embedder: gram size must be >= 1");
}

std::string HashingEmbedder::identity() const {
    return "hashing-fnv1a64-n" + std::to_string(gram_size_) + "-d" + std::to_string(dimension_);
}

std::vector<double> HashingEmbedder::embed(std::string_view text) const {
    std::vector<double> v(dimension_, 0.0);
    for (const std::string& gram : char_ngrams(text, gram_size_)) {
        std::uint64_t h = fnv1a64(gram);
        double sign = (h >> 63) ? -1.0 : 1.0;
        v[h % dimension_] += sign;
    }
    l2_normalize(v);
    return v;
}

HttpEmbedder::HttpEmbedder(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.empty()) throw ValidationError("http embedder: endpoint not set");
}

std::string HttpEmbedder::identity() const { return "http-embed:" + endpoint_.base_url; }

std::vector<double> HttpEmbedder::embed(std::string_view text) const {
    return embed_batch({std::string(text)})[0];
}

nlohmann::json post_backend_json(const HttpEndpoint& endpoint, const std::string& path,
                                 const nlohmann::json& body) {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(std::chrono::duration<double>(endpoint.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(endpoint.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(endpoint.timeout_s));
    if (!endpoint.auth_token.empty()) {
        client.set_default_headers({{"Authorization", "Bearer " + endpoint.auth_token}});
    }

    const std::string payload = body.dump();
    httplib::Result res;
    for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
        res = client.Post(path, payload, "application/json");
        if (res) break;
    }
    if (!res) {
        throw BackendError("POST " + endpoint.base_url + path + ": transport failure (" +
                           httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw BackendError("POST " + endpoint.base_url + path + ": HTTP " +
                           std::to_string(res->status));
    }
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) {
        throw BackendError("POST " + endpoint.base_url + path + ": malformed JSON response");
    }
    return doc;
}

std::vector<std::vector<double>> HttpEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
    nlohmann::json doc = post_backend_json(endpoint_, "/embed", {{"texts", texts}});
    if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array() ||
        doc["vectors"].size() != texts.size()) {
        throw BackendError("/embed: expected " + std::to_string(texts.size()) + " vectors");
    }
    std::vector<std::vector<double>> vectors;
    vectors.reserve(texts.size());
    for (const auto& row : doc["vectors"]) {
        if (!row.is_array() || row.empty()) throw BackendError("/embed: empty vector in response");
        std::vector<double> v;
        v.reserve(row.size());
        for (const auto& x : row) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) {
                throw BackendError("/embed: non-finite component in response");
            }
            v.push_back(x.get<double>());
        }
        if (dimension_ == 0) dimension_ = v.size();
        if (v.size() != dimension_) {
            throw BackendError("/embed: inconsistent vector dimension in response");
        }
        vectors.push_back(std::move(v));
    }
    return vectors;
}

double l2_norm(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

void l2_normalize(std::vector<double>& v) {
    double norm = l2_norm(v);
    if (norm == 0.0) return;
    for (double& x : v) x /= norm;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

}  // namespace qrag
