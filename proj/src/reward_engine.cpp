#include "metrorl/reward_engine.hpp"

#include <algorithm>
#include <set>

#include "metrorl/errors.hpp"

namespace metrorl::reward {

void validate(const RewardConfig& cfg) {
    if (!(cfg.alpha > 0.0)) throw ValidationError("alpha must be > 0");
    if (!(cfg.gamma_easy > 0.0) || !(cfg.gamma_medium > 0.0) || !(cfg.gamma_hard > 0.0)) {
        throw ValidationError("all gamma weights must be > 0");
    }
    if (cfg.beta_0 < 0.0 || cfg.beta_1 < 0.0) throw ValidationError("betas must be >= 0");
    if (!(cfg.detail_cap > 0.0)) throw ValidationError("detail_cap must be > 0");
}

double correctness_plus(const qa::QAItem& item, const answer::ParsedAnswer& p) {
    if (item.qtype == qa::QType::planning) {
        throw UsageError("correctness_plus called on a planning item");
    }
    if (p.kind != answer::AnswerKind::scalar || !p.scalar_value) return 0.0;
    return *p.scalar_value == answer::normalize_scalar(item.answer_text) ? 1.0 : 0.0;
}

namespace {

const std::string& item_param(const qa::QAItem& item, const std::string& key) {
    auto it = item.params.find(key);
    if (it == item.params.end()) {
        throw UsageError("item " + item.qa_id + " lacks param \"" + key + "\"");
    }
    return it->second;
}

// Rewrites the parsed route's names into the network's canonical spellings
// (case-insensitive, whitespace collapsed). Nullopt if any name is unknown.
std::optional<transit::Route> canonicalize_route(const answer::RouteAnswer& raw,
                                                 const transit::TransitNetwork& net) {
    std::map<std::string, std::string> line_key, stop_key;
    for (const auto& [lname, stops] : net.lines) {
        line_key.emplace(answer::normalize_name(lname), lname);
        for (const auto& s : stops) {
            stop_key.emplace(answer::normalize_name(s), s);
        }
    }
    transit::Route out;
    for (const auto& seg : raw.segments) {
        auto l = line_key.find(answer::normalize_name(seg.line));
        auto f = stop_key.find(answer::normalize_name(seg.from));
        auto t = stop_key.find(answer::normalize_name(seg.to));
        if (l == line_key.end() || f == stop_key.end() || t == stop_key.end()) {
            return std::nullopt;
        }
        out.segments.push_back({l->second, f->second, t->second});
    }
    return out;
}

}  // namespace

double correctness_planning(const qa::QAItem& item, const answer::ParsedAnswer& p,
                            const transit::TransitNetwork& net) {
    if (item.qtype != qa::QType::planning) {
        throw UsageError("correctness_planning called on a non-planning item");
    }
    if (item.network_id != net.network_id) {
        throw UsageError("item " + item.qa_id + " does not belong to network " + net.network_id);
    }
    if (p.kind != answer::AnswerKind::route || !p.route_value) return 0.0;
    auto route = canonicalize_route(*p.route_value, net);
    if (!route || !transit::is_valid_route(net, *route)) return 0.0;
    auto origin = answer::normalize_name(item_param(item, "stop 1"));
    auto destination = answer::normalize_name(item_param(item, "stop 2"));
    if (answer::normalize_name(route->segments.front().from) != origin) return 0.0;
    if (answer::normalize_name(route->segments.back().to) != destination) return 0.0;
    return 1.0;
}

double detail_reward(const qa::QAItem& item, const answer::ParsedAnswer& p,
                     const transit::TransitNetwork& net, const RewardConfig& cfg) {
    if (item.qtype != qa::QType::planning) {
        throw UsageError("detail_reward called on a non-planning item");
    }
    if (p.kind != answer::AnswerKind::route || !p.route_value ||
        p.route_value->segments.empty()) {
        return 0.0;  // route data empty or format wrong
    }
    const auto& segments = p.route_value->segments;
    const std::size_t n = segments.size();

    std::set<std::string> stop_keys;
    for (const auto& s : transit::all_stops(net)) {
        stop_keys.insert(answer::normalize_name(s));
    }
    const auto origin = answer::normalize_name(item_param(item, "stop 1"));
    const auto destination = answer::normalize_name(item_param(item, "stop 2"));
    std::string gt_first_line;
    if (item.answer_route && !item.answer_route->segments.empty()) {
        gt_first_line = answer::normalize_name(item.answer_route->segments.front().line);
    }

    double score = 0.0;
    if (answer::normalize_name(segments.front().from) == origin ||
        answer::normalize_name(segments.back().to) == destination) {
        score += 2.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int transfers_so_far = static_cast<int>(i);
        if (transfers_so_far > item.transfer_count) {
            score -= 5.0;
        }
        if (transfers_so_far == 0 &&
            answer::normalize_name(segments[i].line) == gt_first_line && !gt_first_line.empty()) {
            score += 4.0;
        }
        if (stop_keys.count(answer::normalize_name(segments[i].from)) &&
            stop_keys.count(answer::normalize_name(segments[i].to))) {
            if (i + 1 < n && answer::normalize_name(segments[i].to) ==
                                 answer::normalize_name(segments[i + 1].from)) {
                score += 1.0;
            }
        }
    }
    return std::min(score, cfg.detail_cap);
}

std::pair<double, double> difficulty_weight(const qa::QAItem& item, const RewardConfig& cfg) {
    double w_map = 0.0;
    switch (item.map_difficulty) {
        case transit::Difficulty::easy: w_map = cfg.gamma_easy; break;
        case transit::Difficulty::medium: w_map = cfg.gamma_medium; break;
        case transit::Difficulty::hard: w_map = cfg.gamma_hard; break;
    }
    const bool transfers = item.qtype == qa::QType::planning && item.transfer_count >= 1;
    return {w_map, transfers ? cfg.beta_1 : cfg.beta_0};
}

RewardBreakdown compose(double r_format, double r_correct, double r_detail,
                        std::pair<double, double> weights, const RewardConfig& cfg) {
    RewardBreakdown out;
    out.r_format = r_format;
    out.r_correct = r_correct;
    out.r_detail = r_detail;
    out.w_map = weights.first;
    out.w_question = weights.second;
    out.w_difficulty = weights.first + weights.second;
    out.total = out.w_difficulty * (r_format + r_correct + cfg.alpha * r_detail);
    return out;
}

RewardBreakdown score_item(const qa::QAItem& item, const answer::ParsedAnswer& p,
                           const transit::TransitNetwork& net, const RewardConfig& cfg) {
    const double r_format = answer::format_reward(p);
    double r_correct = 0.0;
    double r_detail = 0.0;
    if (item.qtype == qa::QType::planning) {
        r_correct = correctness_planning(item, p, net);
        r_detail = detail_reward(item, p, net, cfg);
    } else {
        r_correct = correctness_plus(item, p);
    }
    return compose(r_format, r_correct, r_detail, difficulty_weight(item, cfg), cfg);
}

double weighted_accuracy(const std::vector<std::pair<qa::QAItem, bool>>& results,
                         const EvalWeights& weights) {
    if (results.empty()) throw UsageError("weighted_accuracy over empty results");
    double num = 0.0, den = 0.0;
    for (const auto& [item, correct] : results) {
        const double w = weights.of(item.map_difficulty);
        num += correct ? w : 0.0;
        den += w;
    }
    return num / den;
}

double weighted_map_score(const std::vector<std::pair<qa::QAItem, double>>& results,
                          const EvalWeights& weights) {
    if (results.empty()) throw UsageError("weighted_map_score over empty results");
    double num = 0.0, den = 0.0;
    for (const auto& [item, detail] : results) {
        const double w = weights.of(item.map_difficulty);
        num += w * detail;
        den += w;
    }
    return num / den;
}

}  // namespace metrorl::reward
