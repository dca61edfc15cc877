// Acceptance gate: one check per release criterion, each printed as a single
// PASS/FAIL line with the measured quantities. Exit code 0 iff all pass.
//
// Oracles here are written from scratch against the documented behavior and
// never call the code paths they judge.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metrorl/answer_format.hpp"
#include "metrorl/cli_commands.hpp"
#include "metrorl/curriculum.hpp"
#include "metrorl/errors.hpp"
#include "metrorl/grpo.hpp"
#include "metrorl/qa_generator.hpp"
#include "metrorl/qa_item.hpp"
#include "metrorl/reward_engine.hpp"
#include "metrorl/rng.hpp"
#include "metrorl/transit_graph.hpp"

using namespace metrorl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// Criterion 1: independent re-implementation of the detail-reward algorithm.
// ---------------------------------------------------------------------------

std::string oracle_norm(const std::string& raw) {
    std::string out;
    std::size_t i = 0;
    while (i < raw.size()) {
        if (std::isspace(static_cast<unsigned char>(raw[i]))) {
            while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            if (!out.empty() && i < raw.size()) out.push_back(' ');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
            ++i;
        }
    }
    return out;
}

// Literal transcription of the published pseudocode: +2 for either matching
// endpoint, -5 per segment whose transfer index exceeds the question's
// transfer count, +4 when the first segment rides the reference route's first
// line, +1 per on-map chained junction, capped at +10 with no floor.
double oracle_detail(const qa::QAItem& item, const answer::ParsedAnswer& p,
                     const transit::TransitNetwork& net) {
    if (p.kind != answer::AnswerKind::route || !p.route_value ||
        p.route_value->segments.empty()) {
        return 0.0;
    }
    const auto& segs = p.route_value->segments;
    std::set<std::string> stations;
    for (const auto& [line, stops] : net.lines) {
        (void)line;
        for (const auto& s : stops) stations.insert(oracle_norm(s));
    }
    std::string first_line;
    if (item.answer_route && !item.answer_route->segments.empty()) {
        first_line = oracle_norm(item.answer_route->segments[0].line);
    }
    double score = 0.0;
    if (oracle_norm(segs[0].from) == oracle_norm(item.params.at("stop 1")) ||
        oracle_norm(segs[segs.size() - 1].to) == oracle_norm(item.params.at("stop 2"))) {
        score += 2.0;
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (static_cast<int>(i) > item.transfer_count) score -= 5.0;
        if (i == 0 && !first_line.empty() && oracle_norm(segs[i].line) == first_line) {
            score += 4.0;
        }
        const bool both_known = stations.count(oracle_norm(segs[i].from)) != 0 &&
                                stations.count(oracle_norm(segs[i].to)) != 0;
        if (both_known && i + 1 < segs.size() &&
            oracle_norm(segs[i].to) == oracle_norm(segs[i + 1].from)) {
            score += 1.0;
        }
    }
    return std::min(score, 10.0);
}

std::string mutate_name(const std::string& name, Rng& rng) {
    switch (rng.below(4)) {
        case 0: return name;
        case 1: {  // random case flips
            std::string out = name;
            for (char& c : out) {
                if (rng.below(2)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            }
            return out;
        }
        case 2: return "  " + name + " ";  // stray whitespace
        default: return name + "X";        // a genuinely different name
    }
}

Outcome criterion_detail_oracle() {
    std::vector<transit::TransitNetwork> nets;
    std::vector<std::vector<qa::QAItem>> items;
    for (int n = 0; n < 5; ++n) {
        transit::SyntheticSpec spec;
        spec.network_id = "fuzz" + std::to_string(n);
        spec.line_count = 4 + 2 * n;
        spec.stops_per_line_min = 4;
        spec.stops_per_line_max = 8;
        auto net = transit::generate_synthetic_network(100 + n, spec);
        items.push_back(qa::generate_planning(net, 200 + n, 10));
        nets.push_back(std::move(net));
    }

    Rng rng(42);
    int trials = 0, mismatches = 0;
    reward::RewardConfig cfg;
    while (trials < 1000) {
        const auto& net = nets[rng.below(nets.size())];
        const auto& pool = items[&net - nets.data()];
        const auto& item = pool[rng.below(pool.size())];

        // Candidate route: start from the reference answer or a random walk,
        // then mutate names, truncate, extend, or scramble the chain.
        std::vector<transit::RouteSegment> segs;
        if (rng.below(2) && item.answer_route) {
            segs = item.answer_route->segments;
        } else {
            auto stops = transit::all_stops(net);
            std::vector<std::string> stop_list(stops.begin(), stops.end());
            std::vector<std::string> line_list;
            for (const auto& [line, s] : net.lines) {
                (void)s;
                line_list.push_back(line);
            }
            const std::size_t len = 1 + rng.below(4);
            for (std::size_t i = 0; i < len; ++i) {
                segs.push_back({line_list[rng.below(line_list.size())],
                                stop_list[rng.below(stop_list.size())],
                                stop_list[rng.below(stop_list.size())]});
            }
        }
        if (!segs.empty() && rng.below(4) == 0) segs.resize(1 + rng.below(segs.size()));
        if (rng.below(4) == 0) segs.push_back(segs.back());
        for (auto& seg : segs) {
            seg.line = mutate_name(seg.line, rng);
            seg.from = mutate_name(seg.from, rng);
            seg.to = mutate_name(seg.to, rng);
        }
        std::string text;
        if (rng.below(10) == 0) {
            text = "no route for you";  // malformed: both sides must say 0
        } else {
            text = answer::route_wire_text(answer::RouteAnswer{segs});
        }
        auto parsed = answer::parse_route(text);
        const double engine = reward::detail_reward(item, parsed, net, cfg);
        const double oracle = oracle_detail(item, parsed, net);
        if (engine != oracle) ++mismatches;
        ++trials;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d/%d fuzzed triples agree exactly", trials - mismatches,
                  trials);
    return {mismatches == 0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 2: the composite formula and its exact scaling law.
// ---------------------------------------------------------------------------

Outcome criterion_composition() {
    Rng rng(7);
    double worst = 0.0;
    int scale_breaks = 0;
    reward::RewardConfig cfg;
    for (int trial = 0; trial < 500; ++trial) {
        cfg.alpha = 0.1 + rng.unit();
        const double rf = rng.below(2) ? 1.0 : 0.0;
        const double rc = rng.below(2) ? 1.0 : 0.0;
        const double rd = -30.0 + 40.0 * rng.unit();
        const double w_map = 0.05 + 1.95 * rng.unit();
        const double w_question = 0.05 + 1.95 * rng.unit();
        auto b = reward::compose(rf, rc, rd, {w_map, w_question}, cfg);
        const double expected = (w_map + w_question) * (rf + rc + cfg.alpha * rd);
        worst = std::max(worst, std::abs(b.total - expected));
        // Scaling every weight symbol by a power of two scales totals exactly.
        const double c = std::ldexp(1.0, static_cast<int>(rng.below(6)) - 2);
        auto scaled = reward::compose(rf, rc, rd, {c * w_map, c * w_question}, cfg);
        if (scaled.total != c * b.total) ++scale_breaks;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "max |total - W*(Rf+Rc+a*Rd)| = %.2e over 500 tuples, %d scaling breaks",
                  worst, scale_breaks);
    return {worst <= 1e-12 && scale_breaks == 0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 3: advantage centering over a real training run + gradient check.
// ---------------------------------------------------------------------------

Outcome criterion_advantages_and_gradient() {
    // A genuine GRPO run assembled from the public pieces, so every group is
    // observable: rollouts -> rewards -> advantages -> update, policy evolving.
    transit::SyntheticSpec spec;
    spec.network_id = "adv";
    spec.line_count = 10;
    spec.stops_per_line_min = 6;
    spec.stops_per_line_max = 9;
    spec.transfer_density = 0.15;
    auto net = transit::generate_synthetic_network(77, spec);
    auto pool = qa::generate_planning(net, 78, 10);
    grpo::TrainConfig cfg;
    cfg.k = 6;
    cfg.learning_rate = 0.3;
    cfg.max_segments = 6;
    reward::RewardConfig rcfg;
    auto policy = grpo::make_policy();
    double worst_sum = 0.0;
    int groups = 0;
    Rng rng(9);
    for (int step = 0; step < 60; ++step) {
        std::vector<grpo::GroupSample> batch;
        for (int qi = 0; qi < 4; ++qi) {
            grpo::GroupSample g;
            g.query = pool[rng.below(pool.size())];
            for (int k = 0; k < cfg.k; ++k) {
                auto traj = grpo::rollout(policy, g.query, net, cfg, rng.next());
                g.rewards.push_back(grpo::mode_reward(g.query, traj.answer_text, net, rcfg,
                                                      grpo::TrainMode::rewardmap)
                                        .total);
                g.responses.push_back(std::move(traj));
            }
            g.advantages = grpo::group_advantages(g.rewards);
            double sum = 0.0;
            for (double a : g.advantages) sum += a;
            worst_sum = std::max(worst_sum, std::abs(sum));
            ++groups;
            batch.push_back(std::move(g));
        }
        policy = grpo::update(policy, batch, cfg);
    }

    // Finite-difference check on randomized instances, half with an active
    // KL penalty against a random reference policy.
    auto objective = [](const grpo::PolicyState& p, const std::vector<grpo::GroupSample>& b,
                        const grpo::TrainConfig& c) {
        return grpo::objective_and_gradient(p, b, c).first;
    };
    double worst_rel = 0.0;
    int instances = 0;
    for (int trial = 0; trial < 24; ++trial) {
        grpo::TrainConfig fd_cfg;
        fd_cfg.k = 3;
        fd_cfg.max_segments = 4;
        fd_cfg.kl_coeff = (trial % 2 == 0) ? 0.0 : 0.5;
        grpo::PolicyState probe = grpo::make_policy();
        std::vector<grpo::GroupSample> batch;
        std::set<std::string> keys;
        for (int qi = 0; qi < 2; ++qi) {
            grpo::GroupSample g;
            g.query = pool[rng.below(pool.size())];
            for (int k = 0; k < fd_cfg.k; ++k) {
                auto traj = grpo::rollout(probe, g.query, net, fd_cfg, rng.next());
                for (const auto& d : traj.decisions) {
                    for (const auto& a : d.actions) {
                        for (const auto& [key, v] : a) {
                            (void)v;
                            keys.insert(key);
                        }
                    }
                }
                g.responses.push_back(std::move(traj));
                g.rewards.push_back(-2.0 + 12.0 * rng.unit());
            }
            g.advantages = grpo::group_advantages(g.rewards);
            batch.push_back(std::move(g));
        }
        grpo::PolicyState point;
        for (const auto& key : keys) {
            point.parameters[key] = -1.0 + 2.0 * rng.unit();
            point.reference_parameters[key] = -1.0 + 2.0 * rng.unit();
        }
        auto [value, grad] = grpo::objective_and_gradient(point, batch, fd_cfg);
        (void)value;
        // h chosen at the noise/truncation sweet spot for this objective's
        // scale: smaller steps are dominated by cancellation in f(x+h)-f(x-h).
        const double h = 1e-4;
        for (const auto& key : keys) {
            auto plus = point, minus = point;
            plus.parameters[key] += h;
            minus.parameters[key] -= h;
            const double fd =
                (objective(plus, batch, fd_cfg) - objective(minus, batch, fd_cfg)) / (2 * h);
            const double g = grad.count(key) ? grad.at(key) : 0.0;
            worst_rel = std::max(worst_rel,
                                 std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6}));
        }
        ++instances;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max |sum(adv)| = %.2e over %d groups; max FD rel err = %.2e over %d instances",
                  worst_sum, groups, worst_rel, instances);
    return {worst_sum <= 1e-9 && worst_rel <= 1e-4 && instances >= 20, buf};
}

// ---------------------------------------------------------------------------
// Criterion 4: sparse-reward mitigation on hard maps.
// ---------------------------------------------------------------------------

Outcome criterion_sparse_reward() {
    std::map<std::string, transit::TransitNetwork> nets;
    std::vector<qa::QAItem> pool;
    for (int n = 0; n < 10; ++n) {
        transit::SyntheticSpec spec;
        spec.network_id = "hard" + std::to_string(n);
        spec.line_count = 14;
        spec.stops_per_line_min = 7;
        spec.stops_per_line_max = 10;
        spec.transfer_density = 0.12;
        auto net = transit::generate_synthetic_network(1000 + n, spec);
        auto items = qa::generate_planning(net, 2000 + n, 30);
        nets[net.network_id] = net;
        int kept = 0;
        for (const auto& item : items) {
            if (item.transfer_count >= 2 && item.transfer_count <= 4 && kept < 6) {
                pool.push_back(item);
                ++kept;
            }
        }
    }

    int wins = 0;
    double zfrac[2] = {0.0, 0.0};  // [rewardmap, baseline], averaged over seeds
    std::string pairs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto plan = curriculum::build_plan(pool, curriculum::Granularity::none, seed);
        grpo::TrainConfig cfg;
        cfg.k = 8;
        cfg.batch_queries = 12;
        cfg.learning_rate = 0.4;
        cfg.kl_coeff = 1e-3;
        cfg.max_segments = 6;
        cfg.seed = seed;
        reward::RewardConfig rcfg;
        grpo::TrainOptions opts;
        opts.epochs_per_stage = 40;
        opts.eval_every = 5;
        opts.eval_items = pool;
        int first80[2];
        for (int m = 0; m < 2; ++m) {
            const auto mode = m == 0 ? grpo::TrainMode::rewardmap : grpo::TrainMode::baseline;
            auto res = grpo::train(pool, plan, nets, cfg, rcfg, mode, opts);
            first80[m] = std::numeric_limits<int>::max();
            const int quarter = static_cast<int>(res.log.rows.size()) / 4;
            double zsum = 0.0;
            for (const auto& row : res.log.rows) {
                if (row.step <= quarter) zsum += row.zero_reward_group_fraction;
                if (first80[m] == std::numeric_limits<int>::max() &&
                    row.eval_planning_validity && *row.eval_planning_validity >= 0.8) {
                    first80[m] = row.step;
                }
            }
            zfrac[m] += zsum / quarter / 5.0;
        }
        if (first80[0] < first80[1]) ++wins;
        pairs += " " + std::to_string(first80[0]) + "<" + std::to_string(first80[1]);
    }
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "steps to 80%% validity (rewardmap<baseline):%s -> %d/5 wins; "
                  "zero-reward fraction %.3f vs %.3f",
                  pairs.c_str(), wins, zfrac[0], zfrac[1]);
    return {wins >= 4 && zfrac[1] > zfrac[0], buf};
}

// ---------------------------------------------------------------------------
// Criterion 5: curriculum granularity ordering.
// ---------------------------------------------------------------------------

Outcome criterion_curriculum_ordering() {
    auto make_net = [](const std::string& id, std::uint64_t seed) {
        transit::SyntheticSpec spec;
        spec.network_id = id;
        spec.line_count = 16;
        spec.stops_per_line_min = 8;
        spec.stops_per_line_max = 12;
        spec.transfer_density = 0.1;
        return transit::generate_synthetic_network(seed, spec);
    };
    auto make_items = [](const transit::TransitNetwork& net, std::uint64_t seed) {
        qa::Quota q;
        q.torf_1 = 2;
        q.torf_2 = 2;
        q.local_count_1 = 2;
        q.local_count_2 = 2;
        q.global_count = 1;
        auto items = qa::generate(net, seed, q);
        auto plans = qa::generate_planning(net, seed + 7, 60);
        int kept = 0;
        for (const auto& item : plans) {
            if (item.transfer_count >= 3 && item.transfer_count <= 5 && kept < 4) {
                items.push_back(item);
                ++kept;
            }
        }
        return items;
    };
    std::map<std::string, transit::TransitNetwork> nets;
    std::vector<qa::QAItem> pool, test;
    for (int n = 0; n < 8; ++n) {
        auto net = make_net("trainnet" + std::to_string(n), 3000 + n);
        auto items = make_items(net, 4000 + n);
        nets[net.network_id] = net;
        pool.insert(pool.end(), items.begin(), items.end());
    }
    for (int n = 0; n < 3; ++n) {
        auto net = make_net("testnet" + std::to_string(n), 5000 + n);
        auto items = make_items(net, 6000 + n);
        nets[net.network_id] = net;
        test.insert(test.end(), items.begin(), items.end());
    }

    double mean[3], stdev[3];
    const curriculum::Granularity arms[3] = {curriculum::Granularity::fine,
                                             curriculum::Granularity::coarse,
                                             curriculum::Granularity::none};
    for (int a = 0; a < 3; ++a) {
        double sum = 0.0, sum2 = 0.0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto plan = curriculum::build_plan(pool, arms[a], seed);
            grpo::TrainConfig cfg;
            cfg.k = 8;
            cfg.batch_queries = 12;
            cfg.learning_rate = 0.1;
            cfg.kl_coeff = 1e-3;
            cfg.max_segments = 7;
            cfg.seed = seed;
            reward::RewardConfig rcfg;
            grpo::TrainOptions opts;
            opts.epochs_per_stage = 2;
            auto res = grpo::train(pool, plan, nets, cfg, rcfg, grpo::TrainMode::rewardmap, opts);
            auto m = grpo::evaluate(res.policy, test, nets, rcfg, cfg, 12345);
            sum += m.weighted_accuracy;
            sum2 += m.weighted_accuracy * m.weighted_accuracy;
        }
        mean[a] = sum / 5.0;
        stdev[a] = std::sqrt(std::max(0.0, sum2 / 5.0 - mean[a] * mean[a]));
    }
    const double margin = mean[0] - mean[2];
    const double spread = std::max(stdev[0], stdev[2]);
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "test accuracy fine %.4f(+-%.4f) >= coarse %.4f(+-%.4f) >= single %.4f(+-%.4f);"
                  " margin %.4f > spread %.4f",
                  mean[0], stdev[0], mean[1], stdev[1], mean[2], stdev[2], margin, spread);
    return {mean[0] >= mean[1] && mean[1] >= mean[2] && margin > spread, buf};
}

// ---------------------------------------------------------------------------
// Criterion 6: generator fidelity at volume, with an independent checker.
// ---------------------------------------------------------------------------

// Fresh verification logic over the raw line vectors: position scans, set
// intersections, and a breadth-first search on the line graph.
struct Recheck {
    const transit::TransitNetwork& net;

    std::vector<std::string> lines_of(const std::string& stop) const {
        std::vector<std::string> out;
        for (const auto& [line, stops] : net.lines) {
            if (std::find(stops.begin(), stops.end(), stop) != stops.end()) out.push_back(line);
        }
        return out;
    }
    int pos_on(const std::vector<std::string>& stops, const std::string& stop) const {
        auto it = std::find(stops.begin(), stops.end(), stop);
        return it == stops.end() ? -1 : static_cast<int>(it - stops.begin());
    }
    int min_transfers(const std::string& from, const std::string& to) const {
        // BFS over lines; reaching any line through `to` after t hops means
        // t transfers.
        std::map<std::string, int> dist;
        std::deque<std::string> queue;
        for (const auto& line : lines_of(from)) {
            dist[line] = 0;
            queue.push_back(line);
        }
        auto to_lines = lines_of(to);
        int best = std::numeric_limits<int>::max();
        while (!queue.empty()) {
            auto line = queue.front();
            queue.pop_front();
            if (std::find(to_lines.begin(), to_lines.end(), line) != to_lines.end()) {
                best = std::min(best, dist[line]);
                continue;
            }
            for (const auto& stop : net.lines.at(line)) {
                for (const auto& next : lines_of(stop)) {
                    if (!dist.count(next)) {
                        dist[next] = dist[line] + 1;
                        queue.push_back(next);
                    }
                }
            }
        }
        return best;
    }

    bool check(const qa::QAItem& item) const {
        const auto& p = item.params;
        switch (item.qtype) {
            case qa::QType::torf_1: {  // do the two stops share any line?
                bool shared = false;
                for (const auto& line : lines_of(p.at("stop 1"))) {
                    const auto& stops = net.lines.at(line);
                    shared = shared || pos_on(stops, p.at("stop 2")) >= 0;
                }
                return item.answer_text == (shared ? "yes" : "no");
            }
            case qa::QType::torf_2: {  // does the named line serve the stop?
                const auto it = net.lines.find(p.at("line x"));
                const bool serves = it != net.lines.end() &&
                                    pos_on(it->second, p.at("stop 1")) >= 0;
                return item.answer_text == (serves ? "yes" : "no");
            }
            case qa::QType::global_count: {  // how many lines does the map have?
                int count = 0;
                for (const auto& [line, s] : net.lines) {
                    (void)line;
                    (void)s;
                    ++count;
                }
                return item.answer_text == std::to_string(count);
            }
            case qa::QType::local_count_2: {  // how many lines serve the stop?
                return item.answer_text ==
                       std::to_string(lines_of(p.at("stop 1")).size());
            }
            case qa::QType::local_count_1: {
                int truth = -1;
                for (const auto& line : lines_of(p.at("stop 1"))) {
                    const auto& stops = net.lines.at(line);
                    const int a = pos_on(stops, p.at("stop 1"));
                    const int b = pos_on(stops, p.at("stop 2"));
                    if (a >= 0 && b >= 0) {
                        const int between = std::abs(a - b) - 1;
                        if (truth >= 0 && truth != between) return false;  // ambiguous pair
                        truth = between;
                    }
                }
                if (truth < 0 || item.options.size() != 4) return false;
                const int idx = item.answer_text[0] - 'A';
                if (idx < 0 || idx > 3) return false;
                return item.options[idx] == std::to_string(truth);
            }
            case qa::QType::planning: {
                if (!item.answer_route || item.answer_route->segments.empty()) return false;
                const auto& segs = item.answer_route->segments;
                if (segs.front().from != p.at("stop 1")) return false;
                if (segs.back().to != p.at("stop 2")) return false;
                for (std::size_t i = 0; i < segs.size(); ++i) {
                    const auto line_it = net.lines.find(segs[i].line);
                    if (line_it == net.lines.end()) return false;
                    if (pos_on(line_it->second, segs[i].from) < 0) return false;
                    if (pos_on(line_it->second, segs[i].to) < 0) return false;
                    if (segs[i].from == segs[i].to) return false;
                    if (i + 1 < segs.size() && segs[i].to != segs[i + 1].from) return false;
                }
                const int transfers = static_cast<int>(segs.size()) - 1;
                if (item.transfer_count != transfers) return false;
                return transfers == min_transfers(p.at("stop 1"), p.at("stop 2"));
            }
        }
        return false;
    }
};

Outcome criterion_generator_fidelity() {
    std::map<std::string, transit::TransitNetwork> nets;
    std::vector<qa::QAItem> items;
    int net_index = 0;
    while (items.size() < 10000) {
        transit::SyntheticSpec spec;
        spec.network_id = "vol" + std::to_string(net_index);
        spec.line_count = 7;
        spec.stops_per_line_min = 6;
        spec.stops_per_line_max = 9;
        spec.transfer_density = 0.2;
        auto net = transit::generate_synthetic_network(9000 + net_index, spec);
        qa::Quota quota;
        quota.torf_1 = 20;
        quota.torf_2 = 20;
        quota.local_count_1 = 12;
        quota.local_count_2 = 12;
        quota.global_count = 1;
        quota.planning = 25;
        auto batch = qa::generate(net, 9000 + net_index, quota);
        items.insert(items.end(), batch.begin(), batch.end());
        nets[net.network_id] = std::move(net);
        ++net_index;
    }
    items = qa::balance_yes_no(items, nets, 31);

    std::map<qa::QType, std::map<std::string, int>> yes_no;
    std::map<std::string, int> globals_per_net;
    int mismatches = 0;
    for (const auto& item : items) {
        if (item.qtype == qa::QType::torf_1 || item.qtype == qa::QType::torf_2) {
            yes_no[item.qtype][item.answer_text]++;
        }
        if (item.qtype == qa::QType::global_count) globals_per_net[item.network_id]++;
        Recheck oracle{nets.at(item.network_id)};
        if (!oracle.check(item)) ++mismatches;
    }
    bool balanced = true;
    for (const auto& [type, counts] : yes_no) {
        (void)type;
        const int yes = counts.count("yes") ? counts.at("yes") : 0;
        const int no = counts.count("no") ? counts.at("no") : 0;
        balanced = balanced && std::abs(yes - no) <= 1;
    }
    bool one_global = globals_per_net.size() == nets.size();
    for (const auto& [id, count] : globals_per_net) {
        (void)id;
        one_global = one_global && count == 1;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%zu items over %zu networks: %d oracle mismatches, yes/no balanced=%s, "
                  "one global-count per map=%s",
                  items.size(), nets.size(), mismatches, balanced ? "yes" : "no",
                  one_global ? "yes" : "no");
    return {items.size() >= 10000 && mismatches == 0 && balanced && one_global, buf};
}

// ---------------------------------------------------------------------------
// Criterion 7: the hand-computed weighted-accuracy fixture.
// ---------------------------------------------------------------------------

Outcome criterion_metric_arithmetic() {
    auto fixture = [](transit::Difficulty d) {
        qa::QAItem item;
        item.qa_id = "fx-" + transit::to_string(d);
        item.map_difficulty = d;
        return item;
    };
    std::vector<std::pair<qa::QAItem, bool>> results = {
        {fixture(transit::Difficulty::easy), true},
        {fixture(transit::Difficulty::medium), false},
        {fixture(transit::Difficulty::hard), true},
    };
    const double got = reward::weighted_accuracy(results, reward::EvalWeights{});
    const double expected = 3.0 / 4.5;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "weighted accuracy %.12f vs 3.0/4.5 = %.12f", got, expected);
    return {std::abs(got - expected) <= 1e-12, buf};
}

// ---------------------------------------------------------------------------
// Criterion 8: byte-identical reruns from manifests.
// ---------------------------------------------------------------------------

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        out[fs::relative(entry.path(), dir).string()] = buf.str();
    }
    return out;
}

Outcome criterion_manifest_rerun() {
    auto base = fs::temp_directory_path() / "metrorl_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);
    std::ostringstream sink;

    cli::GenmapOptions gm;
    gm.count = 3;
    gm.seed = 7;
    gm.out_dir = (base / "maps").string();
    if (cli::cmd_genmap(gm, sink) != 0) return {false, "genmap failed"};

    cli::GenqaOptions gq;
    for (int i = 0; i < 3; ++i) {
        gq.network_files.push_back((base / "maps" / ("net" + std::to_string(i) + ".json")).string());
    }
    gq.holdout = {"net2"};
    gq.seed = 11;
    gq.out_dir = (base / "data").string();
    if (cli::cmd_genqa(gq, sink) != 0) return {false, "genqa failed"};

    cli::TrainCmdOptions tr;
    tr.dataset_file = (base / "data" / "train.jsonl").string();
    tr.network_files = gq.network_files;
    tr.eval_dataset_file = (base / "data" / "test.jsonl").string();
    tr.seed = 3;
    tr.epochs_per_stage = 2;
    tr.eval_every = 5;
    tr.out_dir = (base / "run").string();
    tr.configs.train.k = 4;
    tr.configs.train.batch_queries = 8;
    tr.configs.train.learning_rate = 0.1;
    tr.configs.train.max_segments = 6;
    if (cli::cmd_train(tr, sink) != 0) return {false, "train failed"};

    auto items = qa::items_from_jsonl_file(tr.dataset_file);
    std::ostringstream answers;
    for (const auto& item : items) {
        std::string text = item.qtype == qa::QType::planning
                               ? answer::route_wire_text(
                                     answer::to_route_answer(*item.answer_route))
                               : "\\boxed{" + item.answer_text + "}";
        answers << "{\"answer\": \"";
        for (char c : text) {  // minimal JSON string escaping for the fixture
            if (c == '"' || c == '\\') answers << '\\';
            answers << c;
        }
        answers << "\", \"qa_id\": \"" << item.qa_id << "\"}\n";
    }
    std::ofstream((base / "answers.jsonl").string(), std::ios::binary) << answers.str();
    cli::ScoreOptions sc;
    sc.dataset_file = tr.dataset_file;
    sc.answers_file = (base / "answers.jsonl").string();
    sc.network_files = gq.network_files;
    sc.out_dir = (base / "scored").string();
    if (cli::cmd_score(sc, sink) != 0) return {false, "score failed"};

    cli::TrainCmdOptions tr2 = tr;
    tr2.seed = 9;
    tr2.out_dir = (base / "run2").string();
    if (cli::cmd_train(tr2, sink) != 0) return {false, "second train failed"};
    cli::CurvesOptions cv;
    cv.log_a_file = tr.out_dir + "/training_log.csv";
    cv.log_b_file = tr2.out_dir + "/training_log.csv";
    cv.out_dir = (base / "curves").string();
    if (cli::cmd_curves(cv, sink) != 0) return {false, "curves failed"};

    int identical = 0, total = 0;
    for (const std::string dir : {gm.out_dir, gq.out_dir, tr.out_dir, sc.out_dir, cv.out_dir}) {
        auto copy = base / ("rerun" + std::to_string(total));
        cli::cmd_rerun(dir + "/manifest.json", copy.string(), sink);
        if (dir_bytes(dir) == dir_bytes(copy)) ++identical;
        ++total;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d/%d command reruns byte-identical (incl. manifests)",
                  identical, total);
    return {identical == total, buf};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria = {
        {"detail-reward oracle equivalence", criterion_detail_oracle},
        {"composite reward formula", criterion_composition},
        {"advantage centering + gradient", criterion_advantages_and_gradient},
        {"sparse-reward mitigation", criterion_sparse_reward},
        {"curriculum granularity ordering", criterion_curriculum_ordering},
        {"generator fidelity at volume", criterion_generator_fidelity},
        {"weighted-accuracy arithmetic", criterion_metric_arithmetic},
        {"manifest rerun determinism", criterion_manifest_rerun},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%zu/8] %s  %s: %s (%.1f s)\n", i + 1, outcome.pass ? "PASS" : "FAIL",
                    criteria[i].name, outcome.detail.c_str(), secs);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    if (failures == 0) {
        std::printf("acceptance: all 8 criteria pass\n");
    } else {
        std::printf("acceptance: %d of 8 criteria FAILED\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
