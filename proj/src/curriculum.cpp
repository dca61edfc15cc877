#include "metrorl/curriculum.hpp"

#include <utility>

#include "json.hpp"
#include "metrorl/errors.hpp"
#include "metrorl/rng.hpp"

namespace metrorl::curriculum {

using qa::QType;

std::string to_string(Granularity g) {
    switch (g) {
        case Granularity::fine: return "fine";
        case Granularity::coarse: return "coarse";
        case Granularity::none: return "none";
    }
    throw DomainError("unknown granularity");
}

Granularity granularity_from_string(const std::string& s) {
    if (s == "fine") return Granularity::fine;
    if (s == "coarse") return Granularity::coarse;
    if (s == "none") return Granularity::none;
    throw UsageError("unknown granularity: " + s);
}

std::vector<std::set<QType>> stage_type_sets(Granularity g) {
    const std::set<QType> torf = {QType::torf_1, QType::torf_2};
    const std::set<QType> counting = {QType::global_count, QType::local_count_1,
                                      QType::local_count_2};
    const std::set<QType> planning = {QType::planning};
    std::set<QType> plus = torf;
    plus.insert(counting.begin(), counting.end());
    std::set<QType> all = plus;
    all.insert(QType::planning);
    switch (g) {
        case Granularity::fine: return {torf, counting, planning};
        case Granularity::coarse: return {plus, planning};
        case Granularity::none: return {all};
    }
    throw DomainError("unknown granularity");
}

static std::string type_list(const std::set<QType>& types) {
    std::string out;
    for (QType t : types) {
        if (!out.empty()) out += ", ";
        out += qa::to_string(t);
    }
    return out;
}

CurriculumPlan build_plan(const std::vector<qa::QAItem>& pool, Granularity g, std::uint64_t seed) {
    if (pool.empty()) throw UsageError("curriculum pool is empty");
    CurriculumPlan plan;
    plan.seed = seed;
    plan.granularity = g;
    int next_id = 1;
    for (const auto& types : stage_type_sets(g)) {
        Stage stage;
        stage.stage_id = next_id++;
        stage.qtypes = types;
        for (const auto& item : pool) {
            if (types.count(item.qtype)) stage.items.push_back(item);
        }
        if (stage.items.empty()) {
            plan.warnings.push_back("stage " + std::to_string(stage.stage_id) + " (" +
                                    type_list(types) + ") has no items");
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(stage.stage_id),
                            static_cast<std::uint64_t>(0)));
        rng.shuffle(stage.items);
        plan.stages.push_back(std::move(stage));
    }
    return plan;
}

static const Stage& find_stage(const CurriculumPlan& plan, int stage_id) {
    for (const auto& stage : plan.stages) {
        if (stage.stage_id == stage_id) return stage;
    }
    throw UsageError("no stage with id " + std::to_string(stage_id));
}

std::vector<qa::QAItem> stage_epoch_order(const CurriculumPlan& plan, int stage_id, int epoch) {
    if (epoch < 0) throw UsageError("epoch must be non-negative");
    const Stage& stage = find_stage(plan, stage_id);
    std::vector<qa::QAItem> order = stage.items;
    if (epoch > 0) {
        Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(stage_id),
                            static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
    }
    return order;
}

std::vector<std::pair<int, qa::QAItem>> iterate(const CurriculumPlan& plan, int epochs_per_stage) {
    if (epochs_per_stage < 1) throw UsageError("epochs_per_stage must be >= 1");
    std::vector<std::pair<int, qa::QAItem>> stream;
    for (const auto& stage : plan.stages) {
        for (int epoch = 0; epoch < epochs_per_stage; ++epoch) {
            for (auto& item : stage_epoch_order(plan, stage.stage_id, epoch)) {
                stream.emplace_back(stage.stage_id, std::move(item));
            }
        }
    }
    return stream;
}

std::string plan_manifest_json(const CurriculumPlan& plan, int epochs_per_stage) {
    nlohmann::json j;
    j["granularity"] = to_string(plan.granularity);
    j["seed"] = plan.seed;
    j["epochs_per_stage"] = epochs_per_stage;
    j["warnings"] = plan.warnings;
    j["stages"] = nlohmann::json::array();
    for (const auto& stage : plan.stages) {
        nlohmann::json js;
        js["stage_id"] = stage.stage_id;
        js["qtypes"] = nlohmann::json::array();
        for (QType t : stage.qtypes) js["qtypes"].push_back(qa::to_string(t));
        js["item_ids"] = nlohmann::json::array();
        for (const auto& item : stage.items) js["item_ids"].push_back(item.qa_id);
        j["stages"].push_back(std::move(js));
    }
    j["emission_order"] = nlohmann::json::array();
    for (const auto& [stage_id, item] : iterate(plan, epochs_per_stage)) {
        j["emission_order"].push_back({{"stage_id", stage_id}, {"qa_id", item.qa_id}});
    }
    return j.dump(2) + "\n";
}

}  // namespace metrorl::curriculum
