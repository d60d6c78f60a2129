#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qrag {

struct RewardConfig {
    double beta = 1.0;    // improvement bonus scale
    double lambda = 1.0;  // regression penalty scale

    void validate() const;  // throws ValidationError
};

enum class RewardBranch { exact, improve, regress, neutral };

std::string_view reward_branch_name(RewardBranch branch);

struct RewardBreakdown {
    int format = 0;         // R_f: 0 or 1
    double accuracy = 0.0;  // R_a
    double total = 0.0;     // R = R_f + R_a
    double d_q = 0.0;       // normalized_distance(question, ground truth)
    double d_c = 0.0;       // normalized_distance(answer, ground truth)
    RewardBranch branch = RewardBranch::exact;
    std::string answer;     // answer extracted by parse_output
    bool format_ok = false;
};

// 1 iff raw matches the think-then-answer template.
int format_reward(std::string_view raw);

// Piecewise accuracy reward:
//   c = g                     -> 2.0
//   d_c < d_q (improvement)   -> (1 - d_c) + beta * (1 - d_c)^2
//   d_c > d_q (regression)    -> -lambda * d_c
//   d_c = d_q (neutral)       -> 0.0
// The d_c/d_q comparison is exact — edit counts and lengths are
// cross-multiplied as integers, so float rounding can never flip a branch.
// Throws ValidationError when g or q is empty.
double accuracy_reward(std::string_view c, std::string_view g, std::string_view q,
                       const RewardConfig& config = {});

// accuracy_reward plus the branch and both distances; fills every field of
// RewardBreakdown except format/total/answer/format_ok.
RewardBreakdown accuracy_breakdown(std::string_view c, std::string_view g, std::string_view q,
                                   const RewardConfig& config = {});

// Parses raw, scores the extracted answer (template mismatch falls back to
// the whole trimmed text), and sums format + accuracy.
RewardBreakdown total_reward(std::string_view raw, std::string_view g, std::string_view q,
                             const RewardConfig& config = {});

// a_i = (r_i - mean) / (population std + epsilon). Throws ValidationError on
// an empty group.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double epsilon = 1e-8);

}  // namespace qrag
