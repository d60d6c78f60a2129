#include "qrag/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "qrag/error.hpp"
#include "qrag/promptgen.hpp"
#include "qrag/textdist.hpp"
#include "qrag/unicode.hpp"

namespace qrag {

void RewardConfig::validate() const {
    if (beta < 0.0 || lambda < 0.0) {
        throw ValidationError("reward config: beta and lambda must be non-negative");
    }
}

std::string_view reward_branch_name(RewardBranch branch) {
    switch (branch) {
        case RewardBranch::exact: return "exact";
        case RewardBranch::improve: return "improve";
        case RewardBranch::regress: return "regress";
        case RewardBranch::neutral: return "neutral";
    }
    return "exact";
}

int format_reward(std::string_view raw) { return parse_output(raw).format_ok ? 1 : 0; }

RewardBreakdown accuracy_breakdown(std::string_view c, std::string_view g, std::string_view q,
                                   const RewardConfig& config) {
    config.validate();
    if (g.empty()) throw ValidationError("accuracy reward: empty ground truth");
    if (q.empty()) throw ValidationError("accuracy reward: empty question");

    RewardBreakdown r;
    std::size_t len_g = scalar_length(g);
    std::size_t edits_c = levenshtein(c, g);
    std::size_t edits_q = levenshtein(q, g);
    std::uint64_t denom_c = std::max(scalar_length(c), len_g);
    std::uint64_t denom_q = std::max(scalar_length(q), len_g);
    r.d_c = static_cast<double>(edits_c) / static_cast<double>(denom_c);
    r.d_q = static_cast<double>(edits_q) / static_cast<double>(denom_q);

    if (c == g) {
        r.branch = RewardBranch::exact;
        r.accuracy = 2.0;
        return r;
    }
    // d_c vs d_q as exact rationals: edits_c/denom_c <=> edits_q/denom_q.
    std::uint64_t lhs = static_cast<std::uint64_t>(edits_c) * denom_q;
    std::uint64_t rhs = static_cast<std::uint64_t>(edits_q) * denom_c;
    if (lhs < rhs) {
        r.branch = RewardBranch::improve;
        r.accuracy = (1.0 - r.d_c) + config.beta * (1.0 - r.d_c) * (1.0 - r.d_c);
    } else if (lhs > rhs) {
        r.branch = RewardBranch::regress;
        r.accuracy = -config.lambda * r.d_c;
    } else {
        r.branch = RewardBranch::neutral;
        r.accuracy = 0.0;
    }
    return r;
}

double accuracy_reward(std::string_view c, std::string_view g, std::string_view q,
                       const RewardConfig& config) {
    return accuracy_breakdown(c, g, q, config).accuracy;
}

RewardBreakdown total_reward(std::string_view raw, std::string_view g, std::string_view q,
                             const RewardConfig& config) {
    ModelOutput parsed = parse_output(raw);
    RewardBreakdown r = accuracy_breakdown(parsed.answer, g, q, config);
    r.format = parsed.format_ok ? 1 : 0;
    r.format_ok = parsed.format_ok;
    r.answer = parsed.answer;
    r.total = static_cast<double>(r.format) + r.accuracy;
    return r;
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double epsilon) {
    if (rewards.empty()) throw ValidationError("group advantages: empty group");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    double variance = 0.0;
    for (double r : rewards) variance += (r - mean) * (r - mean);
    variance /= static_cast<double>(rewards.size());
    double std_dev = std::sqrt(variance);

    std::vector<double> advantages;
    advantages.reserve(rewards.size());
    for (double r : rewards) advantages.push_back((r - mean) / (std_dev + epsilon));
    return advantages;
}

}  // namespace qrag
