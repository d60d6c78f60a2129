#include "qrag/generate.hpp"

#include <condition_variable>
#include <mutex>

#include "qrag/error.hpp"
#include "qrag/promptgen.hpp"
#include "qrag/snapshot.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

void GenerationParams::validate() const {
    if (temperature < 0.0) throw ValidationError("generation: temperature must be >= 0");
    if (max_tokens < 1) throw ValidationError("generation: max_tokens must be >= 1");
    if (group_size < 1) throw ValidationError("generation: group_size must be >= 1");
}

std::string query_from_prompt(std::string_view prompt) {
    std::size_t marker = prompt.rfind(kQueryMarker);
    if (marker == std::string_view::npos) {
        throw BackendError("mock backend: prompt lacks the query marker line");
    }
    std::string_view rest = prompt.substr(marker + kQueryMarker.size());
    std::size_t start = 0;
    while (start < rest.size()) {
        std::size_t eol = rest.find('\n', start);
        std::string_view line = rest.substr(start, eol == std::string_view::npos ? rest.size() - start
                                                                                 : eol - start);
        std::string_view trimmed = trim_view(line);
        if (!trimmed.empty()) return std::string(trimmed);
        if (eol == std::string_view::npos) break;
        start = eol + 1;
    }
    throw BackendError("mock backend: no query line after the marker");
}

std::vector<std::string> EchoBackend::generate(const std::string& prompt,
                                               const GenerationParams& params) const {
    params.validate();
    return std::vector<std::string>(static_cast<std::size_t>(params.group_size),
                                    query_from_prompt(prompt));
}

FixtureBackend::FixtureBackend(std::map<std::string, std::vector<std::string>> fixtures)
    : fixtures_(std::move(fixtures)) {
    for (const auto& [query, outputs] : fixtures_) {
        if (outputs.empty()) {
            throw ValidationError("fixture backend: empty output list for '" + query + "'");
        }
    }
}

// Fixture file: {"corrections": {query: output-string | [output, ...]}}.
FixtureBackend FixtureBackend::from_file(const std::filesystem::path& path) {
    nlohmann::json doc = read_json_file(path);
    if (!doc.is_object() || !doc.contains("corrections") || !doc["corrections"].is_object()) {
        throw ValidationError("fixture file: expected top-level object with 'corrections'");
    }
    std::map<std::string, std::vector<std::string>> fixtures;
    for (const auto& [query, value] : doc["corrections"].items()) {
        std::vector<std::string>& outputs = fixtures[query];
        if (value.is_string()) {
            outputs.push_back(value.get<std::string>());
        } else if (value.is_array()) {
            for (const auto& item : value) {
                if (!item.is_string()) {
                    throw ValidationError("fixture file: outputs for '" + query +
                                          "' must be strings");
                }
                outputs.push_back(item.get<std::string>());
            }
        } else {
            throw ValidationError("fixture file: value for '" + query +
                                  "' must be a string or array");
        }
        if (outputs.empty()) {
            throw ValidationError("fixture file: empty output list for '" + query + "'");
        }
    }
    return FixtureBackend(std::move(fixtures));
}

std::vector<std::string> FixtureBackend::generate(const std::string& prompt,
                                                  const GenerationParams& params) const {
    params.validate();
    std::string query = query_from_prompt(prompt);
    auto it = fixtures_.find(query);
    if (it == fixtures_.end()) {
        return std::vector<std::string>(static_cast<std::size_t>(params.group_size), query);
    }
    const std::vector<std::string>& canned = it->second;
    std::vector<std::string> outputs;
    outputs.reserve(static_cast<std::size_t>(params.group_size));
    for (int i = 0; i < params.group_size; ++i) {
        outputs.push_back(canned[static_cast<std::size_t>(i) % canned.size()]);
    }
    return outputs;
}

struct HttpBackend::Gate {
    std::mutex mutex;
    std::condition_variable cv;
    int available;

    explicit Gate(int slots) : available(slots) {}

    void acquire() {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return available > 0; });
        --available;
    }
    void release() {
        {
            std::lock_guard lock(mutex);
            ++available;
        }
        cv.notify_one();
    }
};

HttpBackend::HttpBackend(HttpEndpoint endpoint, int max_in_flight)
    : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.empty()) throw ValidationError("http backend: endpoint not set");
    if (max_in_flight < 1) throw ValidationError("http backend: max_in_flight must be >= 1");
    gate_ = std::make_unique<Gate>(max_in_flight);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::name() const { return "http:" + endpoint_.base_url; }

std::vector<std::string> HttpBackend::generate(const std::string& prompt,
                                               const GenerationParams& params) const {
    params.validate();
    gate_->acquire();
    struct Release {
        Gate* gate;
        ~Release() { gate->release(); }
    } release{gate_.get()};

    nlohmann::json doc = post_backend_json(endpoint_, "/generate",
                                           {{"prompt", prompt},
                                            {"n", params.group_size},
                                            {"temperature", params.temperature},
                                            {"max_tokens", params.max_tokens}});
    if (!doc.is_object() || !doc.contains("outputs") || !doc["outputs"].is_array()) {
        throw BackendError("/generate: response missing outputs array");
    }
    if (doc["outputs"].size() != static_cast<std::size_t>(params.group_size)) {
        throw BackendError("/generate: got " + std::to_string(doc["outputs"].size()) +
                           " outputs, expected " + std::to_string(params.group_size));
    }
    std::vector<std::string> outputs;
    outputs.reserve(doc["outputs"].size());
    for (const auto& item : doc["outputs"]) {
        if (!item.is_string()) throw BackendError("/generate: non-string output in response");
        outputs.push_back(item.get<std::string>());
    }
    return outputs;
}

}  // namespace qrag
