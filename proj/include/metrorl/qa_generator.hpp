#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "metrorl/qa_item.hpp"
#include "metrorl/transit_graph.hpp"

namespace metrorl::qa {

/// Requested item counts per question type for one network.
struct Quota {
    int local_count_1 = 0;
    int local_count_2 = 0;
    int global_count = 0;
    int torf_1 = 0;
    int torf_2 = 0;
    int planning = 0;

    bool operator==(const Quota&) const = default;
};

/// The canonical question template for a type, slots in {braces}.
const std::string& question_template(QType t);

/// Renders a template: every "{slot}" from params is substituted, then the
/// four "{x}" option slots (local_count_1 only) in order. Byte-exact output.
std::string render_question(QType t, const std::map<std::string, std::string>& params,
                            const std::vector<std::string>& options);

/// Four distinct non-negative integers, one equal to true_count, position of
/// the true value uniform over A-D per seed. Distractors are near misses
/// (true +/- 1..3, clipped at zero, window widened only if that ever runs dry).
std::vector<int> make_distractors(int true_count, std::uint64_t seed);

/// Re-derives the item's answer from the transit oracles and throws
/// GenerationError if anything disagrees (the generator never trusts its own
/// intermediate state; emitted items always pass this check).
void verify_item(const QAItem& item, const transit::TransitNetwork& net);

/// Generates quota.{type} items per type from `net`, deterministically per
/// seed. At most one global_count item per network. Candidate parameters are
/// sampled without replacement; an exhausted pool raises GenerationError
/// naming the type.
std::vector<QAItem> generate(const transit::TransitNetwork& net, std::uint64_t seed,
                             const Quota& quota);

/// `count` route-planning items over distinct connected ordered stop pairs.
/// Answer = min_transfer_route; question difficulty easy iff 0 transfers,
/// else hard.
std::vector<QAItem> generate_planning(const transit::TransitNetwork& net, std::uint64_t seed,
                                      int count);

/// Re-balances yes/no answers within each TorF type to |#yes - #no| <= 1 by
/// resampling question parameters (never by relabeling an existing question).
/// When a deficit side's candidate pool runs dry, surplus items are dropped
/// instead; if the deficit side cannot be expressed at all, BalanceError.
/// Non-TorF items pass through untouched; `networks` must cover every TorF
/// item's network_id.
std::vector<QAItem> balance_yes_no(const std::vector<QAItem>& items,
                                   const std::map<std::string, transit::TransitNetwork>& networks,
                                   std::uint64_t seed);

/// Partitions by network id: items from holdout networks become the test
/// split, the rest train. Throws UsageError if a holdout id was never
/// observed, EmptySplitError if either side ends up empty.
std::pair<std::vector<QAItem>, std::vector<QAItem>> split_dataset(
    const std::vector<QAItem>& items, const std::set<std::string>& holdout_network_ids);

}  // namespace metrorl::qa
