#pragma once

#include <utility>
#include <vector>

#include "metrorl/answer_format.hpp"
#include "metrorl/qa_item.hpp"
#include "metrorl/transit_graph.hpp"

namespace metrorl::reward {

struct RewardConfig {
    double alpha = 0.5;  // detail weight in the composite reward
    // W_map levels by map difficulty.
    double gamma_easy = 0.5;
    double gamma_medium = 0.75;
    double gamma_hard = 1.0;
    // W_question levels: beta_0 for transfer count 0 (and all non-planning
    // items), beta_1 for transfer count >= 1.
    double beta_0 = 0.25;
    double beta_1 = 0.5;
    double detail_cap = 10.0;

    bool operator==(const RewardConfig&) const = default;
};

/// Throws ValidationError unless alpha > 0, every gamma > 0, betas >= 0,
/// detail_cap > 0.
void validate(const RewardConfig& cfg);

struct RewardBreakdown {
    double r_format = 0.0;
    double r_correct = 0.0;
    double r_detail = 0.0;
    double w_map = 0.0;
    double w_question = 0.0;
    double w_difficulty = 0.0;  // = w_map + w_question
    double total = 0.0;         // = w_difficulty * (r_format + r_correct + alpha * r_detail)
};

/// Exact-match scoring for counting/TorF/multiple-choice items: 1.0 iff the
/// parsed scalar equals the canonical answer after normalization.
/// Throws UsageError on planning items.
double correctness_plus(const qa::QAItem& item, const answer::ParsedAnswer& p);

/// Planning correctness substitute: 1.0 iff the parsed route is valid against
/// `net` and runs from the question's origin to its destination. Optimality is
/// not required. Stop/line names match case-insensitively with whitespace
/// collapsed. Throws UsageError on non-planning items.
double correctness_planning(const qa::QAItem& item, const answer::ParsedAnswer& p,
                            const transit::TransitNetwork& net);

/// Detail reward for planning: score starts at 0 and is 0 outright for
/// empty/malformed routes; +2 if the first departure is the origin or the last
/// arrival is the destination; per segment i (i transfers so far): -5 when
/// i exceeds the question's transfer count, +4 when i == 0 and the line is the
/// ground-truth route's first line, +1 when both stops exist in the network
/// and a non-final segment chains into the next one; capped at
/// cfg.detail_cap, no floor (negatives pass through).
/// Throws UsageError on non-planning items.
double detail_reward(const qa::QAItem& item, const answer::ParsedAnswer& p,
                     const transit::TransitNetwork& net, const RewardConfig& cfg);

/// (w_map, w_question) for the item: w_map by map difficulty; w_question =
/// beta_0 for transfer count 0 and every non-planning item, else beta_1.
std::pair<double, double> difficulty_weight(const qa::QAItem& item, const RewardConfig& cfg);

/// R = (w_map + w_question) * (r_format + r_correct + alpha * r_detail),
/// composed exactly in this association order (bitwise reproducible).
RewardBreakdown compose(double r_format, double r_correct, double r_detail,
                        std::pair<double, double> weights, const RewardConfig& cfg);

/// Full per-item scoring: format gate, correctness by item type, detail reward
/// for planning (0 otherwise), composed with the item's difficulty weight.
RewardBreakdown score_item(const qa::QAItem& item, const answer::ParsedAnswer& p,
                           const transit::TransitNetwork& net, const RewardConfig& cfg);

struct EvalWeights {
    double easy = 1.0;
    double medium = 1.5;
    double hard = 2.0;

    double of(transit::Difficulty d) const {
        switch (d) {
            case transit::Difficulty::easy: return easy;
            case transit::Difficulty::medium: return medium;
            case transit::Difficulty::hard: return hard;
        }
        return easy;
    }
};

/// Difficulty-weighted accuracy: sum(w_i * correct_i) / sum(w_i), with w_i
/// keyed on map difficulty. Throws UsageError on empty input.
double weighted_accuracy(const std::vector<std::pair<qa::QAItem, bool>>& results,
                         const EvalWeights& weights);

/// Difficulty-weighted mean detail score over planning results (substitute for
/// the original benchmark's map score). Throws UsageError on empty input.
double weighted_map_score(const std::vector<std::pair<qa::QAItem, double>>& results,
                          const EvalWeights& weights);

}  // namespace metrorl::reward
