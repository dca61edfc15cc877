#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "metrorl/qa_item.hpp"

namespace metrorl::curriculum {

enum class Granularity { fine, coarse, none };

std::string to_string(Granularity g);
Granularity granularity_from_string(const std::string& s);

struct Stage {
    int stage_id = 0;
    std::set<qa::QType> qtypes;
    std::vector<qa::QAItem> items;  // post-shuffle order
    bool operator==(const Stage&) const = default;
};

struct CurriculumPlan {
    std::vector<Stage> stages;
    std::uint64_t seed = 0;
    Granularity granularity = Granularity::none;
    std::vector<std::string> warnings;  // one entry per empty stage
    bool operator==(const CurriculumPlan&) const = default;
};

// Stage type-sets for a granularity, in presentation order.
std::vector<std::set<qa::QType>> stage_type_sets(Granularity g);

// Partition the pool into stages and shuffle each stage with a seed derived
// from (seed, stage_id, epoch=0). Stages with no items are kept (a warning is
// recorded on the plan).
CurriculumPlan build_plan(const std::vector<qa::QAItem>& pool, Granularity g, std::uint64_t seed);

// Permutation of a stage for the given epoch. Epoch 0 is the stored order;
// later epochs reshuffle it with a seed derived from (plan.seed, stage_id,
// epoch).
std::vector<qa::QAItem> stage_epoch_order(const CurriculumPlan& plan, int stage_id, int epoch);

// Full emission stream: each stage repeated epochs_per_stage times (reshuffled
// per epoch) before the next stage starts.
std::vector<std::pair<int, qa::QAItem>> iterate(const CurriculumPlan& plan, int epochs_per_stage);

// JSON manifest with stage definitions and the full emission order.
std::string plan_manifest_json(const CurriculumPlan& plan, int epochs_per_stage);

}  // namespace metrorl::curriculum
