#include "metrorl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

#include "metrorl/answer_format.hpp"
#include "metrorl/errors.hpp"
#include "metrorl/rng.hpp"

namespace metrorl::grpo {

using qa::QAItem;
using qa::QType;
using transit::TransitNetwork;

namespace {

constexpr int kMaxCount = 16;  // numeric answer actions 0..kMaxCount

const std::string& param_at(const QAItem& item, const std::string& key) {
    auto it = item.params.find(key);
    if (it == item.params.end()) {
        throw UsageError("item " + item.qa_id + " missing param \"" + key + "\"");
    }
    return it->second;
}

bool line_has(const TransitNetwork& net, const std::string& line, const std::string& stop) {
    auto it = net.lines.find(line);
    if (it == net.lines.end()) return false;
    return std::find(it->second.begin(), it->second.end(), stop) != it->second.end();
}

std::vector<std::string> plus_actions(const QAItem& item) {
    switch (item.qtype) {
        case QType::torf_1:
        case QType::torf_2: return {"yes", "no"};
        case QType::local_count_1: return {"A", "B", "C", "D"};
        case QType::local_count_2:
        case QType::global_count: {
            std::vector<std::string> out;
            for (int i = 0; i <= kMaxCount; ++i) out.push_back(std::to_string(i));
            return out;
        }
        case QType::planning: break;
    }
    throw UsageError("planning items have no single-shot action set");
}

// The answer the map percept endorses; empty when the percept cannot resolve
// one (e.g. stops missing from the network).
std::string endorsed_plus_answer(const QAItem& item, const TransitNetwork& net) {
    try {
        switch (item.qtype) {
            case QType::torf_1:
                return transit::share_line(net, param_at(item, "stop 1"), param_at(item, "stop 2"))
                           ? "yes"
                           : "no";
            case QType::torf_2:
                return transit::lines_through(net, param_at(item, "stop 1"))
                               .count(param_at(item, "line x"))
                           ? "yes"
                           : "no";
            case QType::local_count_2:
                return std::to_string(
                    transit::lines_through(net, param_at(item, "stop 1")).size());
            case QType::global_count: return std::to_string(net.lines.size());
            case QType::local_count_1: {
                const auto& a = param_at(item, "stop 1");
                const auto& b = param_at(item, "stop 2");
                for (const auto& [lname, stops] : net.lines) {
                    (void)stops;
                    if (!line_has(net, lname, a) || !line_has(net, lname, b)) continue;
                    int count = transit::intermediate_stop_count(net, lname, a, b);
                    for (std::size_t i = 0; i < item.options.size(); ++i) {
                        if (item.options[i] == std::to_string(count)) {
                            return std::string(1, static_cast<char>('A' + i));
                        }
                    }
                    return "";
                }
                return "";
            }
            case QType::planning: break;
        }
    } catch (const Error&) {
        return "";
    }
    return "";
}

std::string plus_family(QType t) {
    switch (t) {
        case QType::torf_1:
        case QType::torf_2: return "torf";
        case QType::local_count_1: return "letter";
        case QType::local_count_2:
        case QType::global_count: return "count";
        case QType::planning: break;
    }
    throw UsageError("planning items have no action family");
}

// Per-item planning context: stop->lines index and line-graph BFS distance
// from each line to the closest line serving the destination.
struct PlanContext {
    std::map<std::string, std::set<std::string>> stop_lines;
    std::map<std::string, int> line_dist;

    int stop_dist(const std::string& stop) const {
        auto it = stop_lines.find(stop);
        if (it == stop_lines.end()) return std::numeric_limits<int>::max();
        int best = std::numeric_limits<int>::max();
        for (const auto& line : it->second) {
            auto dit = line_dist.find(line);
            if (dit != line_dist.end()) best = std::min(best, dit->second);
        }
        return best;
    }
};

PlanContext make_plan_context(const TransitNetwork& net, const std::string& dest) {
    PlanContext ctx;
    for (const auto& [lname, stops] : net.lines) {
        for (const auto& stop : stops) ctx.stop_lines[stop].insert(lname);
    }
    std::map<std::string, std::set<std::string>> adjacency;
    for (const auto& [stop, lines] : ctx.stop_lines) {
        (void)stop;
        for (const auto& a : lines) {
            for (const auto& b : lines) {
                if (a != b) adjacency[a].insert(b);
            }
        }
    }
    std::vector<std::string> frontier;
    for (const auto& [lname, stops] : net.lines) {
        (void)stops;
        if (line_has(net, lname, dest)) {
            ctx.line_dist[lname] = 0;
            frontier.push_back(lname);
        }
    }
    int dist = 0;
    while (!frontier.empty()) {
        ++dist;
        std::vector<std::string> next;
        for (const auto& line : frontier) {
            for (const auto& nb : adjacency[line]) {
                if (!ctx.line_dist.count(nb)) {
                    ctx.line_dist[nb] = dist;
                    next.push_back(nb);
                }
            }
        }
        frontier = std::move(next);
    }
    return ctx;
}

struct PlanAction {
    std::string line;
    std::string stop;
};

void plan_candidates(const TransitNetwork& net, const PlanContext& ctx, const std::string& current,
                     const std::string& dest, std::vector<PlanAction>& actions,
                     std::vector<Features>& features) {
    actions.clear();
    features.clear();
    auto it = ctx.stop_lines.find(current);
    if (it == ctx.stop_lines.end()) return;
    const int here = ctx.stop_dist(current);
    for (const auto& line : it->second) {
        const bool serves_dest = line_has(net, line, dest);
        for (const auto& stop : net.lines.at(line)) {
            if (stop == current) continue;
            Features f;
            f["plan/line/" + line] = 1.0;
            if (serves_dest) f["plan/line_serves_dest"] = 1.0;
            if (stop == dest) f["plan/stop_is_dest"] = 1.0;
            auto sit = ctx.stop_lines.find(stop);
            if (sit != ctx.stop_lines.end() && sit->second.size() >= 2) {
                f["plan/transfer_hub"] = 1.0;
            }
            if (stop == dest || ctx.stop_dist(stop) < here) f["percept/trust"] = 1.0;
            actions.push_back({line, stop});
            features.push_back(std::move(f));
        }
    }
}

double dot(const Params& params, const Features& features) {
    double sum = 0.0;
    for (const auto& [key, value] : features) {
        auto it = params.find(key);
        if (it != params.end()) sum += it->second * value;
    }
    return sum;
}

int sample_index(Rng& rng, const std::vector<double>& probs) {
    double r = rng.unit();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (r < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

const char* kCsvHeader =
    "step,stage_id,mean_reward,zero_reward_group_fraction,mean_abs_advantage,kl,"
    "eval_weighted_accuracy,eval_planning_validity";

}  // namespace

void TrainConfig::validate() const {
    if (k < 2) throw ValidationError("group size K must be >= 2");
    if (kl_coeff < 0) throw ValidationError("kl_coeff must be >= 0");
    if (max_segments < 1) throw ValidationError("max_segments must be >= 1");
    if (batch_queries < 1) throw ValidationError("batch_queries must be >= 1");
    if (!(std::isfinite(learning_rate)) || learning_rate < 0) {
        throw ValidationError("learning_rate must be finite and >= 0");
    }
}

std::string to_string(TrainMode m) {
    switch (m) {
        case TrainMode::baseline: return "baseline";
        case TrainMode::rewardmap: return "rewardmap";
    }
    throw DomainError("unknown train mode");
}

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "baseline") return TrainMode::baseline;
    if (s == "rewardmap") return TrainMode::rewardmap;
    throw UsageError("unknown train mode: " + s);
}

PolicyState make_policy() { return PolicyState{}; }

std::vector<double> action_probs(const Params& params, const std::vector<Features>& actions) {
    if (actions.empty()) throw UsageError("no actions to choose from");
    std::vector<double> logits(actions.size());
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        logits[i] = dot(params, actions[i]);
        max_logit = std::max(max_logit, logits[i]);
    }
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - max_logit);
        z += l;
    }
    for (double& l : logits) l /= z;
    return logits;
}

Trajectory rollout(const PolicyState& policy, const QAItem& item, const TransitNetwork& net,
                   const TrainConfig& cfg, std::uint64_t seed) {
    if (item.network_id != net.network_id) {
        throw UsageError("item " + item.qa_id + " references network " + item.network_id +
                         ", not " + net.network_id);
    }
    Rng rng(seed);
    Trajectory traj;
    if (item.qtype != QType::planning) {
        const auto actions = plus_actions(item);
        const auto endorsed = endorsed_plus_answer(item, net);
        const auto family = plus_family(item.qtype);
        DecisionRecord rec;
        for (const auto& a : actions) {
            Features f;
            f["act/" + family + "/" + a] = 1.0;
            if (!endorsed.empty() && a == endorsed) f["percept/trust"] = 1.0;
            rec.actions.push_back(std::move(f));
        }
        rec.chosen = sample_index(rng, action_probs(policy.parameters, rec.actions));
        traj.answer_text = "\\boxed{" + actions[rec.chosen] + "}";
        traj.decisions.push_back(std::move(rec));
        return traj;
    }

    const std::string& origin = param_at(item, "stop 1");
    const std::string& dest = param_at(item, "stop 2");
    const PlanContext ctx = make_plan_context(net, dest);
    std::string current = origin;
    std::vector<transit::RouteSegment> segments;
    std::vector<PlanAction> candidates;
    std::vector<Features> features;
    for (int seg = 0; seg < cfg.max_segments; ++seg) {
        if (current == dest) break;
        plan_candidates(net, ctx, current, dest, candidates, features);
        if (candidates.empty()) break;  // off-map stop: nothing to ride
        DecisionRecord rec;
        rec.actions = features;
        rec.chosen = sample_index(rng, action_probs(policy.parameters, rec.actions));
        const PlanAction& act = candidates[rec.chosen];
        segments.push_back({act.line, current, act.stop});
        current = act.stop;
        traj.decisions.push_back(std::move(rec));
    }
    traj.reached_goal = (current == dest);
    answer::RouteAnswer route;
    route.segments = segments;
    traj.answer_text = answer::route_wire_text(route);
    return traj;
}

std::vector<double> group_advantages(const std::vector<double>& rewards) {
    if (rewards.size() < 2) throw UsageError("group advantages need K >= 2 rewards");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) out.push_back(r - mean);
    return out;
}

reward::RewardBreakdown mode_reward(const QAItem& item, const std::string& answer_text,
                                    const TransitNetwork& net,
                                    const reward::RewardConfig& reward_cfg, TrainMode mode) {
    const answer::ParsedAnswer parsed = (item.qtype == QType::planning)
                                            ? answer::parse_route(answer_text)
                                            : answer::parse_boxed(answer_text);
    auto b = reward::score_item(item, parsed, net, reward_cfg);
    if (mode == TrainMode::baseline) {
        // Format + correctness only: recompose with the detail term zeroed and
        // the difficulty weight neutralized to 1.
        b = reward::compose(b.r_format, b.r_correct, 0.0, {0.5, 0.5}, reward_cfg);
    }
    return b;
}

std::pair<double, Params> objective_and_gradient(const PolicyState& policy,
                                                 const std::vector<GroupSample>& batch,
                                                 const TrainConfig& cfg) {
    if (batch.empty()) throw UsageError("empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double objective = 0.0;
    Params grad;
    int n_states = 0;
    double kl_sum = 0.0;
    Params kl_grad;
    for (const auto& group : batch) {
        if (group.advantages.size() != group.responses.size()) {
            throw UsageError("group advantages not computed");
        }
        for (std::size_t i = 0; i < group.responses.size(); ++i) {
            const double a = group.advantages[i];
            for (const auto& decision : group.responses[i].decisions) {
                const auto p = action_probs(policy.parameters, decision.actions);
                objective +=
                    a * std::log(std::max(p[decision.chosen], 1e-300)) * inv_b;
                if (a != 0.0) {
                    const double scale = a * inv_b;
                    for (const auto& [key, value] :
                         decision.actions[decision.chosen]) {
                        grad[key] += scale * value;
                    }
                    for (std::size_t j = 0; j < decision.actions.size(); ++j) {
                        const double w = scale * p[j];
                        for (const auto& [key, value] : decision.actions[j]) {
                            grad[key] -= w * value;
                        }
                    }
                }
                if (cfg.kl_coeff > 0.0) {
                    const auto q = action_probs(policy.reference_parameters, decision.actions);
                    // KL(p||q) and its gradient sum_a c_a*phi_a - KL*phi_bar,
                    // with c_a = p_a*(log p_a - log q_a).
                    double kl_state = 0.0;
                    Features phi_bar;
                    for (std::size_t j = 0; j < decision.actions.size(); ++j) {
                        const double c = p[j] * (std::log(std::max(p[j], 1e-300)) -
                                                 std::log(std::max(q[j], 1e-300)));
                        kl_state += c;
                        for (const auto& [key, value] : decision.actions[j]) {
                            kl_grad[key] += c * value;
                            phi_bar[key] += p[j] * value;
                        }
                    }
                    for (const auto& [key, value] : phi_bar) {
                        kl_grad[key] -= kl_state * value;
                    }
                    kl_sum += kl_state;
                    ++n_states;
                }
            }
        }
    }
    if (cfg.kl_coeff > 0.0 && n_states > 0) {
        const double scale = cfg.kl_coeff / static_cast<double>(n_states);
        objective -= scale * kl_sum;
        for (const auto& [key, value] : kl_grad) grad[key] -= scale * value;
    }
    return {objective, grad};
}

double mean_state_kl(const PolicyState& policy, const std::vector<GroupSample>& batch) {
    int n_states = 0;
    double kl_sum = 0.0;
    for (const auto& group : batch) {
        for (const auto& response : group.responses) {
            for (const auto& decision : response.decisions) {
                const auto p = action_probs(policy.parameters, decision.actions);
                const auto q = action_probs(policy.reference_parameters, decision.actions);
                for (std::size_t j = 0; j < p.size(); ++j) {
                    kl_sum += p[j] * (std::log(std::max(p[j], 1e-300)) -
                                      std::log(std::max(q[j], 1e-300)));
                }
                ++n_states;
            }
        }
    }
    return n_states ? kl_sum / n_states : 0.0;
}

PolicyState update(const PolicyState& policy, const std::vector<GroupSample>& batch,
                   const TrainConfig& cfg) {
    auto [objective, grad] = objective_and_gradient(policy, batch, cfg);
    (void)objective;
    std::string bad;
    for (const auto& [key, value] : grad) {
        if (!std::isfinite(value)) bad += (bad.empty() ? "" : ", ") + key;
    }
    if (!bad.empty()) throw DomainError("non-finite gradient for features: " + bad);
    PolicyState next = policy;
    for (const auto& [key, value] : grad) {
        const double delta = cfg.learning_rate * value;
        if (delta != 0.0) next.parameters[key] += delta;
    }
    return next;
}

std::string log_to_csv(const TrainingLog& log) {
    std::string out = kCsvHeader;
    out += "\n";
    for (const auto& row : log.rows) {
        out += std::to_string(row.step) + "," + std::to_string(row.stage_id) + "," +
               fmt_double(row.mean_reward) + "," + fmt_double(row.zero_reward_group_fraction) +
               "," + fmt_double(row.mean_abs_advantage) + "," + fmt_double(row.kl) + ",";
        if (row.eval_weighted_accuracy) out += fmt_double(*row.eval_weighted_accuracy);
        out += ",";
        if (row.eval_planning_validity) out += fmt_double(*row.eval_planning_validity);
        out += "\n";
    }
    return out;
}

TrainingLog log_from_csv(const std::string& text) {
    TrainingLog log;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ParseError("training log header mismatch");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 8) throw ParseError("training log row needs 8 fields: " + line);
        StepRow row;
        row.step = std::atoi(fields[0].c_str());
        row.stage_id = std::atoi(fields[1].c_str());
        row.mean_reward = std::strtod(fields[2].c_str(), nullptr);
        row.zero_reward_group_fraction = std::strtod(fields[3].c_str(), nullptr);
        row.mean_abs_advantage = std::strtod(fields[4].c_str(), nullptr);
        row.kl = std::strtod(fields[5].c_str(), nullptr);
        if (!fields[6].empty()) row.eval_weighted_accuracy = std::strtod(fields[6].c_str(), nullptr);
        if (!fields[7].empty()) row.eval_planning_validity = std::strtod(fields[7].c_str(), nullptr);
        log.rows.push_back(row);
    }
    return log;
}

TrainResult train(const std::vector<QAItem>& pool, const curriculum::CurriculumPlan& plan,
                  const std::map<std::string, TransitNetwork>& nets, const TrainConfig& cfg,
                  const reward::RewardConfig& reward_cfg, TrainMode mode,
                  const TrainOptions& options) {
    cfg.validate();
    reward::validate(reward_cfg);
    if (options.epochs_per_stage < 1) throw UsageError("epochs_per_stage must be >= 1");
    std::set<std::string> pool_ids;
    for (const auto& item : pool) pool_ids.insert(item.qa_id);
    std::size_t total = 0;
    for (const auto& stage : plan.stages) {
        total += stage.items.size();
        for (const auto& item : stage.items) {
            if (!pool_ids.count(item.qa_id)) {
                throw UsageError("plan references item absent from pool: " + item.qa_id);
            }
            if (mode == TrainMode::baseline && item.qtype != QType::planning) {
                throw UsageError("baseline mode expects a planning-only plan");
            }
        }
    }
    if (total == 0) throw UsageError("plan has no items");

    TrainResult result;
    result.policy = make_policy();
    int step = 0;
    for (const auto& stage : plan.stages) {
        for (int epoch = 0; epoch < options.epochs_per_stage; ++epoch) {
            const auto order = curriculum::stage_epoch_order(plan, stage.stage_id, epoch);
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(cfg.batch_queries)) {
                const std::size_t end =
                    std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_queries));
                std::vector<GroupSample> batch;
                double reward_sum = 0.0;
                int reward_n = 0;
                int zero_groups = 0;
                double abs_adv = 0.0;
                int adv_n = 0;
                for (std::size_t qi = start; qi < end; ++qi) {
                    const QAItem& item = order[qi];
                    auto nit = nets.find(item.network_id);
                    if (nit == nets.end()) {
                        throw UsageError("unknown network: " + item.network_id);
                    }
                    GroupSample group;
                    group.query = item;
                    bool signal = false;
                    for (int k = 0; k < cfg.k; ++k) {
                        const std::uint64_t rseed =
                            derive_seed(cfg.seed, "rollout", static_cast<std::uint64_t>(step),
                                        static_cast<std::uint64_t>(qi - start),
                                        static_cast<std::uint64_t>(k));
                        auto traj = rollout(result.policy, item, nit->second, cfg, rseed);
                        auto b = mode_reward(item, traj.answer_text, nit->second, reward_cfg, mode);
                        if (b.r_correct != 0.0 || b.r_detail != 0.0) signal = true;
                        reward_sum += b.total;
                        ++reward_n;
                        group.rewards.push_back(b.total);
                        group.responses.push_back(std::move(traj));
                    }
                    group.advantages = group_advantages(group.rewards);
                    for (double a : group.advantages) {
                        abs_adv += std::abs(a);
                        ++adv_n;
                    }
                    if (!signal) ++zero_groups;
                    batch.push_back(std::move(group));
                }
                StepRow row;
                row.kl = mean_state_kl(result.policy, batch);
                result.policy = update(result.policy, batch, cfg);
                ++step;
                row.step = step;
                row.stage_id = stage.stage_id;
                row.mean_reward = reward_sum / reward_n;
                row.zero_reward_group_fraction =
                    static_cast<double>(zero_groups) / static_cast<double>(batch.size());
                row.mean_abs_advantage = abs_adv / adv_n;
                if (!options.eval_items.empty() && options.eval_every > 0 &&
                    step % options.eval_every == 0) {
                    const auto metrics =
                        evaluate(result.policy, options.eval_items, nets, reward_cfg, cfg,
                                 derive_seed(cfg.seed, "eval", static_cast<std::uint64_t>(step)));
                    row.eval_weighted_accuracy = metrics.weighted_accuracy;
                    row.eval_planning_validity = metrics.planning_validity;
                }
                result.log.rows.push_back(std::move(row));
            }
        }
    }
    if (!options.eval_items.empty() && !result.log.rows.empty() &&
        !result.log.rows.back().eval_weighted_accuracy) {
        const auto metrics =
            evaluate(result.policy, options.eval_items, nets, reward_cfg, cfg,
                     derive_seed(cfg.seed, "eval", static_cast<std::uint64_t>(step)));
        result.log.rows.back().eval_weighted_accuracy = metrics.weighted_accuracy;
        result.log.rows.back().eval_planning_validity = metrics.planning_validity;
    }
    return result;
}

EvalMetrics evaluate(const PolicyState& policy, const std::vector<QAItem>& test_items,
                     const std::map<std::string, TransitNetwork>& nets,
                     const reward::RewardConfig& reward_cfg, const TrainConfig& cfg,
                     std::uint64_t seed) {
    if (test_items.empty()) throw UsageError("empty evaluation set");
    std::vector<std::pair<QAItem, bool>> accuracy;
    std::vector<std::pair<QAItem, double>> map_scores;
    int reached = 0;
    int planning = 0;
    for (const QAItem& item : test_items) {
        auto nit = nets.find(item.network_id);
        if (nit == nets.end()) throw UsageError("unknown network: " + item.network_id);
        // Seed per item id so the metrics are invariant to test-item order.
        const auto traj = rollout(policy, item, nit->second, cfg,
                                  derive_seed(seed, "evalrollout", item.qa_id));
        const auto b =
            mode_reward(item, traj.answer_text, nit->second, reward_cfg, TrainMode::rewardmap);
        accuracy.emplace_back(item, b.r_correct == 1.0);
        if (item.qtype == QType::planning) {
            map_scores.emplace_back(item, b.r_detail);
            ++planning;
            if (traj.reached_goal) ++reached;
        }
    }
    EvalMetrics metrics;
    metrics.weighted_accuracy = reward::weighted_accuracy(accuracy, reward::EvalWeights{});
    metrics.weighted_map_score =
        map_scores.empty() ? 0.0 : reward::weighted_map_score(map_scores, reward::EvalWeights{});
    metrics.planning_validity =
        planning ? static_cast<double>(reached) / static_cast<double>(planning) : 0.0;
    metrics.item_count = static_cast<int>(test_items.size());
    metrics.planning_count = planning;
    return metrics;
}

}  // namespace metrorl::grpo
