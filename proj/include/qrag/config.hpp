#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "qrag/generate.hpp"
#include "qrag/pinyin.hpp"
#include "qrag/retrieve.hpp"
#include "qrag/reward.hpp"

namespace qrag {

enum class BackendKind { echo, fixture, http };

BackendKind parse_backend_kind(std::string_view name);

enum class EmbedderKind { hashing, http };

struct BackendConfig {
    BackendKind kind = BackendKind::echo;
    std::string endpoint;
    std::string auth_token;
    double timeout_s = 30.0;
    int retries = 0;
    int max_in_flight = 4;
    GenerationParams params;
};

struct EmbedderConfig {
    EmbedderKind kind = EmbedderKind::hashing;
    std::size_t dimension = 256;
    std::string endpoint;
};

struct RerankerConfig {
    bool use_http = false;  // false: fusion-fallback reranker
    std::string endpoint;
};

struct AppConfig {
    std::filesystem::path web_corpus = "data/corpus/web.jsonl";
    std::filesystem::path log_corpus = "data/corpus/log.jsonl";
    std::filesystem::path entity_corpus = "data/corpus/entity.jsonl";
    std::filesystem::path pinyin_table = "data/pinyin_table.tsv";
    std::filesystem::path prompt_template = "data/templates/correct_think.txt";
    std::filesystem::path graphemic_confusions = "data/confusions/graphemic.tsv";
    std::filesystem::path ill_expression_confusions = "data/confusions/ill_expression.tsv";
    std::filesystem::path index_dir = "index";
    std::optional<std::filesystem::path> fixture;  // fixture-backend map

    FuzzyRules fuzzy;
    RetrieveConfig retrieve;
    RewardConfig reward;
    BackendConfig backend;
    EmbedderConfig embedder;
    RerankerConfig reranker;
};

// Strict JSON: unknown keys anywhere are ValidationErrors, so typos cannot
// silently fall back to defaults. Relative paths resolve against the config
// file's directory. QRAG_ENDPOINT / QRAG_TOKEN environment variables override
// the backend endpoint and auth token after the file is read.
AppConfig load_config(const std::filesystem::path& path);

// The built-in defaults (paths relative to cwd), with env overrides applied.
AppConfig default_config();

}  // namespace qrag
