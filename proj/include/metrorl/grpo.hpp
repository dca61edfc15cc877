#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metrorl/curriculum.hpp"
#include "metrorl/qa_item.hpp"
#include "metrorl/reward_engine.hpp"
#include "metrorl/transit_graph.hpp"

namespace metrorl::grpo {

/// Sparse feature vector / parameter table, keyed by feature name.
using Features = std::map<std::string, double>;
using Params = std::map<std::string, double>;

struct PolicyState {
    Params parameters;
    Params reference_parameters;  // frozen copy the KL penalty pulls toward
    std::string feature_extractor = "tabular-percept-v1";
    bool operator==(const PolicyState&) const = default;
};

/// Fresh policy: all weights zero, i.e. uniform action distributions.
PolicyState make_policy();

/// One decision point of a rollout: the candidate actions' feature vectors
/// and the index that was taken.
struct DecisionRecord {
    std::vector<Features> actions;
    int chosen = 0;
    bool operator==(const DecisionRecord&) const = default;
};

struct Trajectory {
    std::vector<DecisionRecord> decisions;
    std::string answer_text;    // wire-format answer, fed to the stock parsers
    bool reached_goal = false;  // planning only: rollout ended on the destination
    bool operator==(const Trajectory&) const = default;
};

struct TrainConfig {
    int k = 8;                    // responses sampled per query
    double learning_rate = 1e-6;  // scale-free default; tune per experiment
    double kl_coeff = 1e-3;
    int batch_queries = 16;
    int max_segments = 8;  // planning rollout cap
    std::uint64_t seed = 0;
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

enum class TrainMode { baseline, rewardmap };
std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct GroupSample {
    qa::QAItem query;
    std::vector<Trajectory> responses;
    std::vector<double> rewards;
    std::vector<double> advantages;
};

/// Softmax action distribution under `params`; sums to 1 within 1e-9.
std::vector<double> action_probs(const Params& params, const std::vector<Features>& actions);

/// Sample one response. Plus items take a single categorical answer action;
/// planning items build a route segment-by-segment (choose a line through the
/// current stop and a stop to ride to) until the destination is reached or
/// max_segments forces a stop.
Trajectory rollout(const PolicyState& policy, const qa::QAItem& item,
                   const transit::TransitNetwork& net, const TrainConfig& cfg, std::uint64_t seed);

/// Mean-centered returns: A_i = r_i - mean(r). Throws UsageError for K < 2.
std::vector<double> group_advantages(const std::vector<double>& rewards);

/// Reward for one raw answer under the given mode. rewardmap = the full
/// difficulty-weighted composite; baseline = format + correctness only (the
/// composite with the detail term zeroed and difficulty weights neutralized
/// to 1).
reward::RewardBreakdown mode_reward(const qa::QAItem& item, const std::string& answer_text,
                                    const transit::TransitNetwork& net,
                                    const reward::RewardConfig& reward_cfg, TrainMode mode);

/// Objective mean_groups[ sum_i A_i log pi(y_i|x) ] - kl_coeff * KL and its
/// gradient at `policy`, with trajectories held fixed (KL is the exact
/// categorical KL to the reference, averaged over visited states).
std::pair<double, Params> objective_and_gradient(const PolicyState& policy,
                                                 const std::vector<GroupSample>& batch,
                                                 const TrainConfig& cfg);

/// Batch-mean per-state KL(pi_theta || pi_ref) over all visited states.
double mean_state_kl(const PolicyState& policy, const std::vector<GroupSample>& batch);

/// One ascent step on the objective. Throws DomainError (with the offending
/// feature names) if the gradient is non-finite.
PolicyState update(const PolicyState& policy, const std::vector<GroupSample>& batch,
                   const TrainConfig& cfg);

struct StepRow {
    int step = 0;  // 1-based update index
    int stage_id = 0;
    double mean_reward = 0.0;
    double zero_reward_group_fraction = 0.0;  // groups with no non-format signal
    double mean_abs_advantage = 0.0;
    double kl = 0.0;
    std::optional<double> eval_weighted_accuracy;
    std::optional<double> eval_planning_validity;
    bool operator==(const StepRow&) const = default;
};

struct TrainingLog {
    std::vector<StepRow> rows;
    bool operator==(const TrainingLog&) const = default;
};

std::string log_to_csv(const TrainingLog& log);
TrainingLog log_from_csv(const std::string& text);

struct EvalMetrics {
    double weighted_accuracy = 0.0;
    double weighted_map_score = 0.0;  // difficulty-weighted detail over planning items
    double planning_validity = 0.0;   // share of planning rollouts reaching the goal
    int item_count = 0;
    int planning_count = 0;
};

struct TrainOptions {
    int epochs_per_stage = 1;
    int eval_every = 0;  // 0 = evaluate only after the final step
    std::vector<qa::QAItem> eval_items;
};

struct TrainResult {
    TrainingLog log;
    PolicyState policy;
};

/// Full GRPO loop over the plan's emission stream. Batches never straddle
/// stage boundaries. baseline mode requires a planning-only plan.
TrainResult train(const std::vector<qa::QAItem>& pool, const curriculum::CurriculumPlan& plan,
                  const std::map<std::string, transit::TransitNetwork>& nets,
                  const TrainConfig& cfg, const reward::RewardConfig& reward_cfg, TrainMode mode,
                  const TrainOptions& options = {});

/// Sampled evaluation on held-out items. Throws UsageError on empty input.
EvalMetrics evaluate(const PolicyState& policy, const std::vector<qa::QAItem>& test_items,
                     const std::map<std::string, transit::TransitNetwork>& nets,
                     const reward::RewardConfig& reward_cfg, const TrainConfig& cfg,
                     std::uint64_t seed);

}  // namespace metrorl::grpo
