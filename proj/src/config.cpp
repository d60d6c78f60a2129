#include "qrag/config.hpp"

#include <cstdlib>

#include "qrag/error.hpp"
#include "qrag/snapshot.hpp"

namespace qrag {

namespace {

void check_keys(const nlohmann::json& obj, const char* where,
                std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ValidationError(std::string("config: unknown key '") + key + "' in " + where);
        }
    }
}

template <typename T>
void read_into(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_path(const nlohmann::json& obj, const char* key, const std::filesystem::path& base,
               std::filesystem::path& out) {
    if (!obj.contains(key)) return;
    std::filesystem::path p = obj.at(key).get<std::string>();
    out = p.is_absolute() ? p : base / p;
}

void apply_env_overrides(AppConfig& config) {
    if (const char* endpoint = std::getenv("QRAG_ENDPOINT")) {
        config.backend.endpoint = endpoint;
    }
    if (const char* token = std::getenv("QRAG_TOKEN")) {
        config.backend.auth_token = token;
    }
}

}  // namespace

BackendKind parse_backend_kind(std::string_view name) {
    if (name == "echo") return BackendKind::echo;
    if (name == "fixture") return BackendKind::fixture;
    if (name == "http") return BackendKind::http;
    throw ValidationError("config: unknown backend kind '" + std::string(name) + "'");
}

AppConfig load_config(const std::filesystem::path& path) {
    nlohmann::json doc = read_json_file(path);
    if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
    check_keys(doc, "config root",
               {"paths", "fuzzy", "retrieve", "reward", "backend", "embedder", "reranker"});

    AppConfig config;
    std::filesystem::path base = path.parent_path();
    auto rebase = [&](std::filesystem::path& p) {
        if (!p.is_absolute()) p = base / p;
    };
    rebase(config.web_corpus);
    rebase(config.log_corpus);
    rebase(config.entity_corpus);
    rebase(config.pinyin_table);
    rebase(config.prompt_template);
    rebase(config.graphemic_confusions);
    rebase(config.ill_expression_confusions);
    rebase(config.index_dir);

    if (doc.contains("paths")) {
        const auto& paths = doc["paths"];
        check_keys(paths, "paths",
                   {"web_corpus", "log_corpus", "entity_corpus", "pinyin_table",
                    "prompt_template", "graphemic_confusions", "ill_expression_confusions",
                    "index_dir", "fixture"});
        read_path(paths, "web_corpus", base, config.web_corpus);
        read_path(paths, "log_corpus", base, config.log_corpus);
        read_path(paths, "entity_corpus", base, config.entity_corpus);
        read_path(paths, "pinyin_table", base, config.pinyin_table);
        read_path(paths, "prompt_template", base, config.prompt_template);
        read_path(paths, "graphemic_confusions", base, config.graphemic_confusions);
        read_path(paths, "ill_expression_confusions", base, config.ill_expression_confusions);
        read_path(paths, "index_dir", base, config.index_dir);
        if (paths.contains("fixture")) {
            std::filesystem::path p = paths.at("fixture").get<std::string>();
            config.fixture = p.is_absolute() ? p : base / p;
        }
    }
    if (doc.contains("fuzzy")) {
        const auto& fuzzy = doc["fuzzy"];
        check_keys(fuzzy, "fuzzy",
                   {"zh_z", "ch_c", "sh_s", "n_l", "f_h", "an_ang", "en_eng", "in_ing",
                    "ian_iang", "uan_uang", "tone_sensitive"});
        read_into(fuzzy, "zh_z", config.fuzzy.zh_z);
        read_into(fuzzy, "ch_c", config.fuzzy.ch_c);
        read_into(fuzzy, "sh_s", config.fuzzy.sh_s);
        read_into(fuzzy, "n_l", config.fuzzy.n_l);
        read_into(fuzzy, "f_h", config.fuzzy.f_h);
        read_into(fuzzy, "an_ang", config.fuzzy.an_ang);
        read_into(fuzzy, "en_eng", config.fuzzy.en_eng);
        read_into(fuzzy, "in_ing", config.fuzzy.in_ing);
        read_into(fuzzy, "ian_iang", config.fuzzy.ian_iang);
        read_into(fuzzy, "uan_uang", config.fuzzy.uan_uang);
        read_into(fuzzy, "tone_sensitive", config.fuzzy.tone_sensitive);
    }
    if (doc.contains("retrieve")) {
        const auto& retrieve = doc["retrieve"];
        check_keys(retrieve, "retrieve",
                   {"k_per_channel", "w_lex", "w_sem", "w_pho", "k_per_source", "rerank_floor"});
        read_into(retrieve, "k_per_channel", config.retrieve.k_per_channel);
        read_into(retrieve, "w_lex", config.retrieve.w_lex);
        read_into(retrieve, "w_sem", config.retrieve.w_sem);
        read_into(retrieve, "w_pho", config.retrieve.w_pho);
        read_into(retrieve, "k_per_source", config.retrieve.k_per_source);
        if (retrieve.contains("rerank_floor") && !retrieve["rerank_floor"].is_null()) {
            config.retrieve.rerank_floor = retrieve["rerank_floor"].get<double>();
        }
        config.retrieve.validate();
    }
    if (doc.contains("reward")) {
        const auto& reward = doc["reward"];
        check_keys(reward, "reward", {"beta", "lambda"});
        read_into(reward, "beta", config.reward.beta);
        read_into(reward, "lambda", config.reward.lambda);
        config.reward.validate();
    }
    if (doc.contains("backend")) {
        const auto& backend = doc["backend"];
        check_keys(backend, "backend",
                   {"kind", "endpoint", "auth_token", "timeout_s", "retries", "max_in_flight",
                    "temperature", "max_tokens", "group_size"});
        if (backend.contains("kind")) {
            config.backend.kind = parse_backend_kind(backend.at("kind").get<std::string>());
        }
        read_into(backend, "endpoint", config.backend.endpoint);
        read_into(backend, "auth_token", config.backend.auth_token);
        read_into(backend, "timeout_s", config.backend.timeout_s);
        read_into(backend, "retries", config.backend.retries);
        read_into(backend, "max_in_flight", config.backend.max_in_flight);
        read_into(backend, "temperature", config.backend.params.temperature);
        read_into(backend, "max_tokens", config.backend.params.max_tokens);
        read_into(backend, "group_size", config.backend.params.group_size);
        config.backend.params.validate();
    }
    if (doc.contains("embedder")) {
        const auto& embedder = doc["embedder"];
        check_keys(embedder, "embedder", {"kind", "dimension", "endpoint"});
        if (embedder.contains("kind")) {
            std::string kind = embedder.at("kind").get<std::string>();
            if (kind == "hashing") config.embedder.kind = EmbedderKind::hashing;
            else if (kind == "http") config.embedder.kind = EmbedderKind::http;
            else throw ValidationError("config: unknown embedder kind '" + kind + "'");
        }
        read_into(embedder, "dimension", config.embedder.dimension);
        read_into(embedder, "endpoint", config.embedder.endpoint);
        if (config.embedder.kind == EmbedderKind::http && config.embedder.endpoint.empty()) {
            throw ValidationError("config: http embedder needs an endpoint");
        }
    }
    if (doc.contains("reranker")) {
        const auto& reranker = doc["reranker"];
        check_keys(reranker, "reranker", {"kind", "endpoint"});
        if (reranker.contains("kind")) {
            std::string kind = reranker.at("kind").get<std::string>();
            if (kind == "fallback") config.reranker.use_http = false;
            else if (kind == "http") config.reranker.use_http = true;
            else throw ValidationError("config: unknown reranker kind '" + kind + "'");
        }
        read_into(reranker, "endpoint", config.reranker.endpoint);
        if (config.reranker.use_http && config.reranker.endpoint.empty()) {
            throw ValidationError("config: http reranker needs an endpoint");
        }
    }

    apply_env_overrides(config);
    return config;
}

AppConfig default_config() {
    AppConfig config;
    apply_env_overrides(config);
    return config;
}

}  // namespace qrag
