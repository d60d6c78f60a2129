#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/http_client.hpp"

namespace qrag {

// text -> real vector. Implementations must be deterministic within one
// identity: equal text gives equal vector, and the identity string changes
// whenever the mapping would.
class Embedder {
  public:
    virtual ~Embedder() = default;

    virtual std::string identity() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<double> embed(std::string_view text) const = 0;

    virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const;
};

// Offline embedder: character bigrams hashed into d buckets with FNV-1a64,
// signed by the hash's top bit, L2-normalized. Texts with no grams map to the
// all-zero sentinel vector.
class HashingEmbedder : public Embedder {
  public:
    explicit HashingEmbedder(std::size_t dimension = 256, std::size_t gram_size = 2);

    std::string identity() const override;
    std::size_t dimension() const override { return dimension_; }
    std::vector<double> embed(std::string_view text) const override;

  private:
    std::size_t dimension_;
    std::size_t gram_size_;
};

// Client for an embedding service: POST /embed {"texts":[...]} ->
// {"vectors":[[...]]}. Dimension is learned from the first response and
// enforced afterwards.
class HttpEmbedder : public Embedder {
  public:
    explicit HttpEmbedder(HttpEndpoint endpoint);

    std::string identity() const override;
    std::size_t dimension() const override { return dimension_; }
    std::vector<double> embed(std::string_view text) const override;
    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const override;

  private:
    HttpEndpoint endpoint_;
    mutable std::size_t dimension_ = 0;
};

double l2_norm(const std::vector<double>& v);

// Scales to unit norm in place; a zero vector stays zero (the "no
// information" sentinel).
void l2_normalize(std::vector<double>& v);

double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace qrag
