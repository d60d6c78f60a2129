// qrag: build the retrieval indexes, correct questions, evaluate datasets,
// score reward triples, and inject synthetic errors.

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrag/config.hpp"
#include "qrag/error.hpp"
#include "qrag/evalharness.hpp"
#include "qrag/hashing.hpp"
#include "qrag/snapshot.hpp"
#include "qrag/textdist.hpp"
#include "qrag/unicode.hpp"

namespace {

using namespace qrag;

constexpr const char* kEntryStoreFile = "entry_store.json";
constexpr const char* kLexicalFile = "lexical_index.json";
constexpr const char* kPhoneticFile = "phonetic_index.json";
constexpr const char* kVectorFile = "vector_index.json";
constexpr const char* kManifestFile = "manifest.json";

std::unique_ptr<Embedder> make_embedder(const AppConfig& config) {
    if (config.embedder.kind == EmbedderKind::http) {
        HttpEndpoint endpoint;
        endpoint.base_url = config.embedder.endpoint;
        endpoint.timeout_s = config.backend.timeout_s;
        return std::make_unique<HttpEmbedder>(endpoint);
    }
    return std::make_unique<HashingEmbedder>(config.embedder.dimension);
}

std::unique_ptr<GenerationBackend> make_backend(const AppConfig& config) {
    switch (config.backend.kind) {
        case BackendKind::echo:
            return std::make_unique<EchoBackend>();
        case BackendKind::fixture: {
            if (!config.fixture) {
                throw ValidationError("fixture backend needs a fixture file (--fixture)");
            }
            return std::make_unique<FixtureBackend>(FixtureBackend::from_file(*config.fixture));
        }
        case BackendKind::http: {
            if (config.backend.endpoint.empty()) {
                throw ValidationError("http backend needs an endpoint (config or QRAG_ENDPOINT)");
            }
            HttpEndpoint endpoint;
            endpoint.base_url = config.backend.endpoint;
            endpoint.timeout_s = config.backend.timeout_s;
            endpoint.auth_token = config.backend.auth_token;
            endpoint.retries = config.backend.retries;
            return std::make_unique<HttpBackend>(endpoint, config.backend.max_in_flight);
        }
    }
    throw ValidationError("unknown backend kind");
}

std::unique_ptr<Reranker> make_reranker(const AppConfig& config) {
    if (!config.reranker.use_http) return nullptr;
    HttpEndpoint endpoint;
    endpoint.base_url = config.reranker.endpoint;
    endpoint.timeout_s = config.backend.timeout_s;
    return std::make_unique<HttpReranker>(endpoint);
}

// Owns every pipeline component; CorrectionPipeline borrows from it.
struct LoadedPipeline {
    PinyinTable pinyin;
    EntryStore store;
    LexicalIndex lexical;
    PhoneticIndex phonetic;
    VectorIndex vector;
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Reranker> reranker;
    std::unique_ptr<GenerationBackend> backend;
    std::string template_text;

    CorrectionPipeline view(const AppConfig& config) const {
        CorrectionPipeline p;
        p.store = &store;
        p.lexical = &lexical;
        p.phonetic = &phonetic;
        p.vector = &vector;
        p.embedder = embedder.get();
        p.pinyin = &pinyin;
        p.reranker = reranker.get();
        p.backend = backend.get();
        p.template_text = template_text;
        p.fuzzy = config.fuzzy;
        p.retrieve = config.retrieve;
        p.reward = config.reward;
        p.params = config.backend.params;
        return p;
    }
};

LoadedPipeline load_pipeline(const AppConfig& config) {
    LoadedPipeline lp;
    lp.pinyin = load_table(config.pinyin_table);
    std::filesystem::path dir = config.index_dir;
    for (const char* file : {kEntryStoreFile, kLexicalFile, kPhoneticFile, kVectorFile}) {
        if (!std::filesystem::exists(dir / file)) {
            throw IoError("missing index snapshot " + (dir / file).string() +
                          " — run 'qrag index-build' first");
        }
    }
    lp.store = EntryStore::load(dir / kEntryStoreFile);
    lp.lexical = LexicalIndex::load(dir / kLexicalFile);
    lp.phonetic = PhoneticIndex::load(dir / kPhoneticFile);
    lp.vector = VectorIndex::load(dir / kVectorFile);
    lp.embedder = make_embedder(config);
    lp.reranker = make_reranker(config);
    lp.backend = make_backend(config);
    lp.template_text = load_template(config.prompt_template);
    return lp;
}

int cmd_index_build(const AppConfig& config) {
    PinyinTable table = load_table(config.pinyin_table);

    IngestStats web_stats, log_stats, entity_stats;
    std::vector<KnowledgeEntry> entries = ingest_jsonl(config.web_corpus, Source::web, &web_stats);
    std::vector<KnowledgeEntry> log_entries =
        ingest_jsonl(config.log_corpus, Source::log, &log_stats);
    std::vector<KnowledgeEntry> entity_entries =
        ingest_jsonl(config.entity_corpus, Source::entity, &entity_stats);
    entries.insert(entries.end(), std::make_move_iterator(log_entries.begin()),
                   std::make_move_iterator(log_entries.end()));
    entries.insert(entries.end(), std::make_move_iterator(entity_entries.begin()),
                   std::make_move_iterator(entity_entries.end()));

    EntryStore store(std::move(entries));
    std::unique_ptr<Embedder> embedder = make_embedder(config);
    LexicalIndex lexical = LexicalIndex::build(store, 2);
    PhoneticIndex phonetic = PhoneticIndex::build(store, table, config.fuzzy, 2);
    VectorIndex vector = VectorIndex::build(store, *embedder);

    std::filesystem::path dir = config.index_dir;
    std::filesystem::create_directories(dir);
    store.save(dir / kEntryStoreFile);
    lexical.save(dir / kLexicalFile);
    phonetic.save(dir / kPhoneticFile);
    vector.save(dir / kVectorFile);

    auto corpus_record = [](const std::filesystem::path& path, const IngestStats& stats) {
        return nlohmann::json{{"file", path.filename().string()},
                              {"hash", to_hex64(hash_file(path))},
                              {"kept", stats.kept},
                              {"dropped_low_frequency", stats.dropped_low_frequency},
                              {"duplicates", stats.duplicates}};
    };
    nlohmann::json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["kind"] = "manifest";
    manifest["corpora"] = {{"web", corpus_record(config.web_corpus, web_stats)},
                           {"log", corpus_record(config.log_corpus, log_stats)},
                           {"entity", corpus_record(config.entity_corpus, entity_stats)}};
    manifest["files"] = {{"entry_store", kEntryStoreFile},
                         {"lexical", kLexicalFile},
                         {"phonetic", kPhoneticFile},
                         {"vector", kVectorFile}};
    manifest["entries"] = store.size();
    manifest["embedder"] = embedder->identity();
    write_json_file(manifest, dir / kManifestFile);

    std::cout << "indexed " << store.size() << " entries -> " << dir.string() << "\n";
    std::cout << "dropped " << log_stats.dropped_low_frequency << " low-frequency log entries, "
              << web_stats.duplicates + log_stats.duplicates + entity_stats.duplicates +
                     store.duplicates_dropped()
              << " duplicates\n";
    return 0;
}

int cmd_correct(const AppConfig& config, const std::string& question, bool explain) {
    if (trim_view(question).empty()) throw ValidationError("correct: empty question");
    LoadedPipeline lp = load_pipeline(config);
    CorrectionResult result = run_correction(lp.view(config), question);

    if (explain) {
        std::cout << "== context ==\n";
        for (const RetrievalCandidate& c : result.context) {
            auto ord = lp.store.find(c.entry_id);
            const KnowledgeEntry& entry = lp.store.entry(*ord);
            std::cout << "[" << source_name(entry.source) << "] " << entry.text;
            if (entry.source == Source::entity) {
                std::cout << ":" << entry.description.value_or("");
            }
            std::cout << " (fused=" << c.fused << ", rerank=" << c.rerank_score.value_or(0.0);
            if (c.matched_span) std::cout << ", span=" << *c.matched_span;
            std::cout << ")\n";
        }
        std::cout << "== prompt ==\n" << result.prompt.rendered << "\n";
        std::cout << "== raw output ==\n" << result.raw_outputs.front() << "\n";
        std::cout << "format_ok: " << (result.parsed.format_ok ? "true" : "false") << "\n";
        std::cout << "== answer ==\n";
    }
    std::cout << result.parsed.answer << "\n";
    return 0;
}

int cmd_eval(const AppConfig& config, const std::filesystem::path& dataset_path,
             const std::filesystem::path& report_path) {
    LoadedPipeline lp = load_pipeline(config);
    std::vector<EvalSample> dataset = load_dataset(dataset_path);
    EvalReport report = run_eval(lp.view(config), dataset);
    write_report(report, report_path);

    const EvalAggregates& agg = report.aggregates;
    std::cout << "samples: " << agg.sample_count << " (failed " << agg.failed_count << ")\n";
    std::cout << "model micro CER:    " << agg.micro_cer * 100.0 << "%\n";
    std::cout << "baseline micro CER: " << agg.baseline_micro_cer * 100.0 << "%\n";
    std::cout << "format rate:        " << agg.format_rate * 100.0 << "%\n";
    std::cout << "mean total reward:  " << agg.mean_total_reward << "\n";
    std::cout << "report: " << report_path.string() << "\n";
    return 0;
}

int cmd_reward(const AppConfig& config, const std::filesystem::path& triples_path,
               const std::string& out_path, long group) {
    std::ifstream in(triples_path, std::ios::binary);
    if (!in) throw IoError("reward: cannot open " + triples_path.string());

    struct Triple {
        std::string question, ground_truth, output;
    };
    std::vector<Triple> triples;
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
            throw ValidationError(triples_path.string() + ":" + std::to_string(lineno) + ": " +
                                  e.what());
        }
        auto field = [&](const char* name) -> std::string {
            if (!obj.is_object() || !obj.contains(name) || !obj[name].is_string()) {
                throw ValidationError(triples_path.string() + ":" + std::to_string(lineno) +
                                      ": missing string field '" + name + "'");
            }
            return obj[name].get<std::string>();
        };
        triples.push_back({field("question"), field("ground_truth"), field("output")});
    }

    if (group > 0 && triples.size() % static_cast<std::size_t>(group) != 0) {
        throw ValidationError("reward: --group " + std::to_string(group) +
                              " does not divide " + std::to_string(triples.size()) + " lines");
    }

    std::vector<RewardBreakdown> breakdowns;
    breakdowns.reserve(triples.size());
    for (const Triple& t : triples) {
        breakdowns.push_back(total_reward(t.output, t.ground_truth, t.question, config.reward));
    }
    std::vector<double> advantages(breakdowns.size(), 0.0);
    if (group > 0) {
        for (std::size_t base = 0; base < breakdowns.size();
             base += static_cast<std::size_t>(group)) {
            std::vector<double> rewards;
            for (long i = 0; i < group; ++i) {
                rewards.push_back(breakdowns[base + static_cast<std::size_t>(i)].total);
            }
            std::vector<double> a = group_advantages(rewards);
            for (long i = 0; i < group; ++i) advantages[base + static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
        }
    }

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw IoError("reward: cannot write " + out_path);
        out = &file;
    }
    for (std::size_t i = 0; i < breakdowns.size(); ++i) {
        const RewardBreakdown& r = breakdowns[i];
        nlohmann::json record = {{"format", r.format},
                                 {"accuracy", r.accuracy},
                                 {"total", r.total},
                                 {"d_q", r.d_q},
                                 {"d_c", r.d_c},
                                 {"branch", std::string(reward_branch_name(r.branch))},
                                 {"answer", r.answer}};
        if (group > 0) record["advantage"] = advantages[i];
        *out << record.dump() << "\n";
    }
    return 0;
}

int cmd_inject(const AppConfig& config, const std::string& text, const std::string& type_name,
               std::uint64_t seed) {
    ErrorSpec spec;
    spec.error_type = parse_error_type(type_name);
    spec.seed = seed;
    PinyinTable table;
    if (spec.error_type == ErrorType::phonetic) table = load_table(config.pinyin_table);
    if (spec.error_type == ErrorType::graphemic) {
        spec.graphemic = load_confusion_table(config.graphemic_confusions);
    }
    if (spec.error_type == ErrorType::ill_expression) {
        spec.ill_expression = load_confusion_table(config.ill_expression_confusions);
    }
    InjectResult result = inject_error(text, spec, table);
    if (!result.applied) std::cerr << "no applicable site\n";
    std::cout << result.text << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"question correction engine"};
    app.require_subcommand(1);
    app.fallthrough();  // subcommands inherit this: global flags work after the verb

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file")->envname("QRAG_CONFIG");

    std::string backend_override, fixture_override;
    auto add_backend_flags = [&](CLI::App* cmd) {
        cmd->add_option("--backend", backend_override, "backend override: http, echo, fixture");
        cmd->add_option("--fixture", fixture_override, "fixture file for the fixture backend");
    };

    CLI::App* build = app.add_subcommand("index-build", "ingest corpora and build the indexes");

    std::string question;
    bool explain = false;
    long k_per_source = 0;
    CLI::App* correct = app.add_subcommand("correct", "correct one question");
    correct->add_option("question", question, "the question to correct")->required();
    correct->add_flag("--explain", explain, "print context, prompt, and raw output");
    correct->add_option("--k-per-source", k_per_source, "context entries per source");
    add_backend_flags(correct);

    std::string dataset_path, report_path;
    CLI::App* eval = app.add_subcommand("eval", "run the pipeline over a dataset");
    eval->add_option("--dataset", dataset_path, "JSONL of question/ground_truth")->required();
    eval->add_option("--report", report_path, "output report path")->required();
    add_backend_flags(eval);

    std::string triples_path, reward_out;
    long group = 0;
    CLI::App* reward = app.add_subcommand("reward", "score question/ground_truth/output triples");
    reward->add_option("--triples", triples_path, "JSONL of scoring triples")->required();
    reward->add_option("--out", reward_out, "output path (default stdout)");
    reward->add_option("--group", group, "emit advantages per consecutive group of N")
        ->check(CLI::PositiveNumber);

    std::string inject_text, inject_type;
    std::uint64_t seed = 0;
    CLI::App* inject = app.add_subcommand("inject", "corrupt a text with a synthetic error");
    inject->add_option("text", inject_text, "the text to corrupt")->required();
    inject->add_option("--type", inject_type, "error type")->required();
    inject->add_option("--seed", seed, "site selector");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        AppConfig config = config_path.empty() ? default_config() : load_config(config_path);
        if (!backend_override.empty()) config.backend.kind = parse_backend_kind(backend_override);
        if (!fixture_override.empty()) config.fixture = fixture_override;
        if (k_per_source > 0) config.retrieve.k_per_source = static_cast<std::size_t>(k_per_source);

        if (*build) return cmd_index_build(config);
        if (*correct) return cmd_correct(config, question, explain);
        if (*eval) return cmd_eval(config, dataset_path, report_path);
        if (*reward) return cmd_reward(config, triples_path, reward_out, group);
        if (*inject) return cmd_inject(config, inject_text, inject_type, seed);
        return 1;
    } catch (const qrag::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
