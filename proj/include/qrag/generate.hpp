#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/http_client.hpp"

namespace qrag {

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 256;
    int group_size = 1;  // G: samples per prompt

    void validate() const;  // throws ValidationError
};

// Produces exactly group_size raw outputs per prompt, or throws.
class GenerationBackend {
  public:
    virtual ~GenerationBackend() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::string> generate(const std::string& prompt,
                                              const GenerationParams& params) const = 0;
};

// Pulls the query back out of a rendered prompt: the first non-empty line
// after the last occurrence of kQueryMarker. Throws BackendError when the
// marker is absent — mock backends cannot answer an unmarked prompt.
std::string query_from_prompt(std::string_view prompt);

// Returns the query unchanged, G times.
class EchoBackend : public GenerationBackend {
  public:
    std::string name() const override { return "echo"; }
    std::vector<std::string> generate(const std::string& prompt,
                                      const GenerationParams& params) const override;
};

// Exact query -> canned outputs. Unmatched queries echo. Lists shorter than G
// repeat cyclically so the cardinality contract still holds.
class FixtureBackend : public GenerationBackend {
  public:
    explicit FixtureBackend(std::map<std::string, std::vector<std::string>> fixtures);
    static FixtureBackend from_file(const std::filesystem::path& path);

    std::string name() const override { return "fixture"; }
    std::vector<std::string> generate(const std::string& prompt,
                                      const GenerationParams& params) const override;

  private:
    std::map<std::string, std::vector<std::string>> fixtures_;
};

// POST /generate {"prompt","n","temperature","max_tokens"} -> {"outputs"}.
// In-flight requests are bounded by max_in_flight.
class HttpBackend : public GenerationBackend {
  public:
    explicit HttpBackend(HttpEndpoint endpoint, int max_in_flight = 4);
    ~HttpBackend() override;

    std::string name() const override;
    std::vector<std::string> generate(const std::string& prompt,
                                      const GenerationParams& params) const override;

  private:
    struct Gate;
    HttpEndpoint endpoint_;
    std::unique_ptr<Gate> gate_;
};

}  // namespace qrag
