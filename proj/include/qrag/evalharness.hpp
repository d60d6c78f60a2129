#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qrag/generate.hpp"
#include "qrag/knowledge.hpp"
#include "qrag/promptgen.hpp"
#include "qrag/retrieve.hpp"
#include "qrag/reward.hpp"

namespace qrag {

// Everything one correction needs, borrowed immutably. The indexes must be
// built over *store.
struct CorrectionPipeline {
    const EntryStore* store = nullptr;
    const LexicalIndex* lexical = nullptr;
    const PhoneticIndex* phonetic = nullptr;
    const VectorIndex* vector = nullptr;
    const Embedder* embedder = nullptr;
    const PinyinTable* pinyin = nullptr;
    const Reranker* reranker = nullptr;  // nullptr: fusion-fallback rerank
    const GenerationBackend* backend = nullptr;
    std::string template_text;
    FuzzyRules fuzzy;  // entity extraction equivalence
    RetrieveConfig retrieve;
    RewardConfig reward;
    GenerationParams params;
};

struct CorrectionResult {
    std::vector<RetrievalCandidate> context;  // final context set, rerank order
    PromptBundle prompt;
    std::vector<std::string> raw_outputs;     // length = params.group_size
    ModelOutput parsed;                       // of raw_outputs[0]
};

// retrieve -> entity extraction -> rerank -> assemble -> generate -> parse.
CorrectionResult run_correction(const CorrectionPipeline& pipeline, std::string_view question);

struct EvalSample {
    std::string question;
    std::string ground_truth;
};

// Dataset schema, one JSON object per line:
//   {"question": string, "ground_truth": string}   (both non-empty)
// Malformed lines raise ValidationError with the line number.
std::vector<EvalSample> load_dataset(const std::filesystem::path& path);

struct SampleRecord {
    std::string question;
    std::string ground_truth;
    std::string answer;
    bool format_ok = false;
    bool failed = false;    // backend error; excluded from aggregates
    std::string error;      // failure diagnostic, empty otherwise
    std::uint64_t edits = 0;
    std::uint64_t reference_length = 0;
    double cer = 0.0;
    RewardBreakdown reward;
};

struct EvalAggregates {
    double micro_cer = 0.0;           // total edits / total reference length
    double macro_cer = 0.0;           // mean per-sample CER
    double baseline_micro_cer = 0.0;  // question vs ground truth
    double baseline_macro_cer = 0.0;
    double format_rate = 0.0;
    double mean_total_reward = 0.0;
    double runtime_seconds = 0.0;
    std::uint64_t sample_count = 0;
    std::uint64_t failed_count = 0;
};

struct EvalReport {
    std::vector<SampleRecord> samples;  // dataset order
    EvalAggregates aggregates;
};

// Corrects every sample with G forced to 1 and scores CER + reward against
// the ground truth. Backend failures mark the sample failed and drop it from
// the aggregates; more than max_failure_ratio of the dataset failing is a
// run-level BackendError. Empty dataset is a ValidationError.
EvalReport run_eval(const CorrectionPipeline& pipeline, const std::vector<EvalSample>& dataset,
                    double max_failure_ratio = 0.10);

void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

}  // namespace qrag
