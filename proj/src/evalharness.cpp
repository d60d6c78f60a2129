#include "qrag/evalharness.hpp"

#include <chrono>
#include <fstream>

#include "qrag/error.hpp"
#include "qrag/snapshot.hpp"
#include "qrag/textdist.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

CorrectionResult run_correction(const CorrectionPipeline& pipeline, std::string_view question) {
    if (!pipeline.store || !pipeline.backend || !pipeline.pinyin) {
        throw ValidationError("pipeline: store, backend, and pinyin table are required");
    }
    SearchChannels channels;
    channels.lexical = pipeline.lexical;
    channels.phonetic = pipeline.phonetic;
    channels.vector = pipeline.vector;
    channels.embedder = pipeline.embedder;
    channels.pinyin = pipeline.pinyin;

    CorrectionResult result;
    std::vector<RetrievalCandidate> pool =
        multi_search(channels, *pipeline.store, question, pipeline.retrieve);
    std::vector<EntityHit> entities =
        extract_entity_candidates(question, *pipeline.store, *pipeline.pinyin, pipeline.fuzzy);
    merge_entity_hits(pool, entities, pipeline.retrieve);
    result.context =
        rerank(question, std::move(pool), *pipeline.store, pipeline.reranker, pipeline.retrieve);

    result.prompt =
        assemble_prompt(question, result.context, *pipeline.store, pipeline.template_text);
    result.raw_outputs = pipeline.backend->generate(result.prompt.rendered, pipeline.params);
    if (result.raw_outputs.size() != static_cast<std::size_t>(pipeline.params.group_size)) {
        throw BackendError("backend returned " + std::to_string(result.raw_outputs.size()) +
                           " outputs, expected " + std::to_string(pipeline.params.group_size));
    }
    result.parsed = parse_output(result.raw_outputs.front());
    return result;
}

std::vector<EvalSample> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("dataset: cannot open " + path.string());

    std::vector<EvalSample> samples;
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
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        auto field = [&](const char* name) -> std::string {
            if (!obj.is_object() || !obj.contains(name) || !obj[name].is_string() ||
                obj[name].get<std::string>().empty()) {
                throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                      ": missing non-empty string field '" + name + "'");
            }
            return obj[name].get<std::string>();
        };
        samples.push_back({field("question"), field("ground_truth")});
    }
    return samples;
}

EvalReport run_eval(const CorrectionPipeline& pipeline, const std::vector<EvalSample>& dataset,
                    double max_failure_ratio) {
    if (dataset.empty()) throw ValidationError("run_eval: empty dataset");
    auto started = std::chrono::steady_clock::now();

    CorrectionPipeline eval_pipeline = pipeline;
    eval_pipeline.params.group_size = 1;

    EvalReport report;
    report.samples.reserve(dataset.size());
    std::uint64_t edits = 0, ref_len = 0, baseline_edits = 0;
    double macro = 0.0, baseline_macro = 0.0, reward_sum = 0.0;
    std::uint64_t ok_count = 0, format_count = 0;

    for (const EvalSample& sample : dataset) {
        SampleRecord record;
        record.question = sample.question;
        record.ground_truth = sample.ground_truth;
        try {
            CorrectionResult result = run_correction(eval_pipeline, sample.question);
            record.answer = result.parsed.answer;
            record.format_ok = result.parsed.format_ok;
            record.reward = total_reward(result.raw_outputs.front(), sample.ground_truth,
                                         sample.question, eval_pipeline.reward);
        } catch (const BackendError& e) {
            record.failed = true;
            record.error = e.what();
            report.samples.push_back(std::move(record));
            ++report.aggregates.failed_count;
            continue;
        }

        record.reference_length = scalar_length(sample.ground_truth);
        record.edits = levenshtein(record.answer, sample.ground_truth);
        record.cer = static_cast<double>(record.edits) /
                     static_cast<double>(record.reference_length);

        edits += record.edits;
        ref_len += record.reference_length;
        macro += record.cer;
        std::uint64_t be = levenshtein(sample.question, sample.ground_truth);
        baseline_edits += be;
        baseline_macro += static_cast<double>(be) / static_cast<double>(record.reference_length);
        reward_sum += record.reward.total;
        if (record.format_ok) ++format_count;
        ++ok_count;
        report.samples.push_back(std::move(record));
    }

    double failure_ratio = static_cast<double>(report.aggregates.failed_count) /
                           static_cast<double>(dataset.size());
    if (failure_ratio > max_failure_ratio) {
        throw BackendError("run_eval: " + std::to_string(report.aggregates.failed_count) + " of " +
                           std::to_string(dataset.size()) + " samples failed");
    }

    EvalAggregates& agg = report.aggregates;
    agg.sample_count = dataset.size();
    if (ok_count > 0) {
        agg.micro_cer = static_cast<double>(edits) / static_cast<double>(ref_len);
        agg.macro_cer = macro / static_cast<double>(ok_count);
        agg.baseline_micro_cer = static_cast<double>(baseline_edits) / static_cast<double>(ref_len);
        agg.baseline_macro_cer = baseline_macro / static_cast<double>(ok_count);
        agg.format_rate = static_cast<double>(format_count) / static_cast<double>(ok_count);
        agg.mean_total_reward = reward_sum / static_cast<double>(ok_count);
    }
    agg.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

namespace {

nlohmann::json reward_to_json(const RewardBreakdown& r) {
    return {{"format", r.format},
            {"accuracy", r.accuracy},
            {"total", r.total},
            {"d_q", r.d_q},
            {"d_c", r.d_c},
            {"branch", std::string(reward_branch_name(r.branch))}};
}

RewardBreakdown reward_from_json(const nlohmann::json& j) {
    RewardBreakdown r;
    r.format = j.at("format").get<int>();
    r.accuracy = j.at("accuracy").get<double>();
    r.total = j.at("total").get<double>();
    r.d_q = j.at("d_q").get<double>();
    r.d_c = j.at("d_c").get<double>();
    std::string branch = j.at("branch").get<std::string>();
    if (branch == "exact") r.branch = RewardBranch::exact;
    else if (branch == "improve") r.branch = RewardBranch::improve;
    else if (branch == "regress") r.branch = RewardBranch::regress;
    else if (branch == "neutral") r.branch = RewardBranch::neutral;
    else throw ValidationError("report: unknown reward branch '" + branch + "'");
    r.format_ok = r.format == 1;
    return r;
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "eval_report";
    nlohmann::json samples = nlohmann::json::array();
    for (const SampleRecord& record : report.samples) {
        nlohmann::json s;
        s["question"] = record.question;
        s["ground_truth"] = record.ground_truth;
        s["failed"] = record.failed;
        if (record.failed) {
            s["error"] = record.error;
        } else {
            s["answer"] = record.answer;
            s["format_ok"] = record.format_ok;
            s["edits"] = record.edits;
            s["reference_length"] = record.reference_length;
            s["cer"] = record.cer;
            s["reward"] = reward_to_json(record.reward);
        }
        samples.push_back(std::move(s));
    }
    doc["samples"] = std::move(samples);
    const EvalAggregates& agg = report.aggregates;
    doc["aggregates"] = {{"micro_cer", agg.micro_cer},
                         {"macro_cer", agg.macro_cer},
                         {"baseline_micro_cer", agg.baseline_micro_cer},
                         {"baseline_macro_cer", agg.baseline_macro_cer},
                         {"format_rate", agg.format_rate},
                         {"mean_total_reward", agg.mean_total_reward},
                         {"runtime_seconds", agg.runtime_seconds},
                         {"sample_count", agg.sample_count},
                         {"failed_count", agg.failed_count}};
    write_json_file(doc, path);
}

EvalReport read_report(const std::filesystem::path& path) {
    nlohmann::json doc = read_json_file(path);
    check_snapshot_header(doc, "eval_report");
    EvalReport report;
    for (const auto& s : doc.at("samples")) {
        SampleRecord record;
        record.question = s.at("question").get<std::string>();
        record.ground_truth = s.at("ground_truth").get<std::string>();
        record.failed = s.at("failed").get<bool>();
        if (record.failed) {
            record.error = s.at("error").get<std::string>();
        } else {
            record.answer = s.at("answer").get<std::string>();
            record.format_ok = s.at("format_ok").get<bool>();
            record.edits = s.at("edits").get<std::uint64_t>();
            record.reference_length = s.at("reference_length").get<std::uint64_t>();
            record.cer = s.at("cer").get<double>();
            record.reward = reward_from_json(s.at("reward"));
            record.reward.answer = record.answer;
        }
        report.samples.push_back(std::move(record));
    }
    const auto& agg = doc.at("aggregates");
    report.aggregates.micro_cer = agg.at("micro_cer").get<double>();
    report.aggregates.macro_cer = agg.at("macro_cer").get<double>();
    report.aggregates.baseline_micro_cer = agg.at("baseline_micro_cer").get<double>();
    report.aggregates.baseline_macro_cer = agg.at("baseline_macro_cer").get<double>();
    report.aggregates.format_rate = agg.at("format_rate").get<double>();
    report.aggregates.mean_total_reward = agg.at("mean_total_reward").get<double>();
    report.aggregates.runtime_seconds = agg.at("runtime_seconds").get<double>();
    report.aggregates.sample_count = agg.at("sample_count").get<std::uint64_t>();
    report.aggregates.failed_count = agg.at("failed_count").get<std::uint64_t>();
    return report;
}

}  // namespace qrag
