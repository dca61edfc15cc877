#include "metrorl/qa_generator.hpp"

#include <algorithm>
#include <cstdio>

#include "metrorl/errors.hpp"
#include "metrorl/rng.hpp"

namespace metrorl::qa {

namespace {

// Published templates, byte-exact after slot substitution. \boxed carries a
// single backslash in the rendered text.
const std::string kTplLocalCount1 =
    "Please solve the multiple choice problem and put your answer (one of ABCD) in one "
    "\"\\boxed{}\". According to the subway map, how many intermediate stops are there between "
    "{stop 1} and {stop 2} (except for this two stops)?\nA) {x}\nB) {x}\nC) {x}\nD) {x}";
const std::string kTplLocalCount2 =
    "Please solve the problem and put your answer in one \"\\boxed{}\". According to the subway "
    "map, how many lines pass through {stop 1}?";
const std::string kTplGlobalCount =
    "Please solve the problem and put your answer in one \"\\boxed{}\". According to the subway "
    "map, how many subway (metro) lines are there in total?";
const std::string kTplTorf1 =
    "Please solve the problem and put your answer (only answer yes or no) in one \"\\boxed{}\". "
    "According to the subway map, is it true that {stop 1} is the same line as {stop 2}?";
const std::string kTplTorf2 =
    "Please solve the problem and put your answer (only answer yes or no) in one \"\\boxed{}\". "
    "According to the subway map, is it true that {stop 1} is on the {line x}?";
const std::string kTplPlanning =
    "Plan a route from {stop 1} to {stop 2}, listing each line and transfer.";

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string pad3(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", v);
    return buf;
}

QAItem base_item(const transit::TransitNetwork& net, QType t, int idx) {
    QAItem item;
    item.qa_id = net.network_id + "-" + to_string(t) + "-" + pad3(idx);
    item.network_id = net.network_id;
    item.qtype = t;
    item.map_difficulty = net.difficulty;
    item.question_difficulty = net.difficulty;
    return item;
}

const std::string& param_of(const QAItem& item, const std::string& key) {
    auto it = item.params.find(key);
    if (it == item.params.end()) {
        throw GenerationError("item " + item.qa_id + ": missing param \"" + key + "\"");
    }
    return it->second;
}

std::vector<std::string> sorted_stops(const transit::TransitNetwork& net) {
    auto s = transit::all_stops(net);
    return {s.begin(), s.end()};
}

std::vector<std::string> sorted_lines(const transit::TransitNetwork& net) {
    std::vector<std::string> out;
    for (const auto& [name, stops] : net.lines) out.push_back(name);
    return out;
}

// Shared-line pairs whose intermediate count is the same on every shared line
// (the question names no line, so ambiguous pairs are excluded).
std::vector<std::pair<std::string, std::string>> unambiguous_pairs(
    const transit::TransitNetwork& net) {
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [lname, stops] : net.lines) {
        for (std::size_t i = 0; i < stops.size(); ++i) {
            for (std::size_t j = i + 1; j < stops.size(); ++j) {
                auto key = std::minmax(stops[i], stops[j]);
                if (!seen.insert(key).second) continue;
                auto la = transit::lines_through(net, key.first);
                auto lb = transit::lines_through(net, key.second);
                std::vector<std::string> shared;
                std::set_intersection(la.begin(), la.end(), lb.begin(), lb.end(),
                                      std::back_inserter(shared));
                bool agree = true;
                int count = transit::intermediate_stop_count(net, shared.front(), key.first,
                                                             key.second);
                for (const auto& l : shared) {
                    if (transit::intermediate_stop_count(net, l, key.first, key.second) != count) {
                        agree = false;
                        break;
                    }
                }
                if (agree) out.push_back(key);
            }
        }
    }
    return out;
}

// Stop -> connected-component id over the union graph.
std::map<std::string, int> components(const transit::TransitNetwork& net) {
    std::map<std::string, int> comp;
    auto stops = sorted_stops(net);
    for (const auto& s : stops) comp[s] = -1;
    int next = 0;
    for (const auto& root : stops) {
        if (comp[root] != -1) continue;
        std::vector<std::string> frontier{root};
        comp[root] = next;
        while (!frontier.empty()) {
            auto cur = frontier.back();
            frontier.pop_back();
            for (const auto& l : transit::lines_through(net, cur)) {
                for (const auto& s : net.lines.at(l)) {
                    if (comp[s] == -1) {
                        comp[s] = next;
                        frontier.push_back(s);
                    }
                }
            }
        }
        ++next;
    }
    return comp;
}

void require_quota(const char* type, std::size_t pool, int want) {
    if (static_cast<int>(pool) < want) {
        throw GenerationError(std::string(type) + " quota " + std::to_string(want) +
                              " exceeds candidate pool of " + std::to_string(pool));
    }
}

}  // namespace

const std::string& question_template(QType t) {
    switch (t) {
        case QType::local_count_1: return kTplLocalCount1;
        case QType::local_count_2: return kTplLocalCount2;
        case QType::global_count: return kTplGlobalCount;
        case QType::torf_1: return kTplTorf1;
        case QType::torf_2: return kTplTorf2;
        case QType::planning: return kTplPlanning;
    }
    throw UsageError("invalid qtype value");
}

std::string render_question(QType t, const std::map<std::string, std::string>& params,
                            const std::vector<std::string>& options) {
    std::string text = question_template(t);
    for (const auto& [k, v] : params) {
        text = replace_all(text, "{" + k + "}", v);
    }
    for (const auto& opt : options) {
        auto pos = text.find("{x}");
        if (pos == std::string::npos) {
            throw UsageError("template for " + to_string(t) + " has no option slot left");
        }
        text.replace(pos, 3, opt);
    }
    return text;
}

std::vector<int> make_distractors(int true_count, std::uint64_t seed) {
    if (true_count < 0) throw UsageError("true_count must be >= 0");
    Rng rng(derive_seed(seed, "distractors"));
    std::vector<int> pool;
    for (int window = 3; pool.size() < 3; ++window) {
        pool.clear();
        for (int d = 1; d <= window; ++d) {
            if (true_count - d >= 0) pool.push_back(true_count - d);
            pool.push_back(true_count + d);
        }
    }
    rng.shuffle(pool);
    std::vector<int> options(pool.begin(), pool.begin() + 3);
    options.push_back(true_count);
    rng.shuffle(options);
    return options;
}

void verify_item(const QAItem& item, const transit::TransitNetwork& net) {
    auto fail = [&](const std::string& why) -> void {
        throw GenerationError("item " + item.qa_id + ": " + why);
    };
    if (item.network_id != net.network_id) fail("network id mismatch");
    if (item.map_difficulty != net.difficulty) fail("map difficulty mismatch");
    if (item.qtype != QType::planning) {
        if (item.question_difficulty != item.map_difficulty) {
            fail("question difficulty must equal map difficulty");
        }
        if (item.transfer_count != 0) fail("non-planning transfer_count must be 0");
        if (item.answer_route) fail("non-planning item with a route answer");
    }
    try {
        switch (item.qtype) {
            case QType::local_count_1: {
                if (item.options.size() != 4) fail("needs exactly 4 options");
                if (std::set<std::string>(item.options.begin(), item.options.end()).size() != 4) {
                    fail("options must be distinct");
                }
                const auto& a = param_of(item, "stop 1");
                const auto& b = param_of(item, "stop 2");
                auto la = transit::lines_through(net, a);
                auto lb = transit::lines_through(net, b);
                std::vector<std::string> shared;
                std::set_intersection(la.begin(), la.end(), lb.begin(), lb.end(),
                                      std::back_inserter(shared));
                if (shared.empty()) fail("stops share no line");
                int count = transit::intermediate_stop_count(net, shared.front(), a, b);
                for (const auto& l : shared) {
                    if (transit::intermediate_stop_count(net, l, a, b) != count) {
                        fail("ambiguous pair: shared lines disagree on the count");
                    }
                }
                if (item.answer_text.size() != 1 || item.answer_text[0] < 'A' ||
                    item.answer_text[0] > 'D') {
                    fail("answer must be a letter A-D");
                }
                int hits = 0;
                for (const auto& opt : item.options) {
                    if (opt == std::to_string(count)) ++hits;
                }
                if (hits != 1) fail("exactly one option must equal the true count");
                if (item.options[item.answer_text[0] - 'A'] != std::to_string(count)) {
                    fail("answer letter does not select the true count");
                }
                break;
            }
            case QType::local_count_2: {
                const auto& stop = param_of(item, "stop 1");
                auto expect = std::to_string(transit::lines_through(net, stop).size());
                if (item.answer_text != expect) fail("line count disagrees with the oracle");
                break;
            }
            case QType::global_count: {
                if (item.answer_text != std::to_string(net.lines.size())) {
                    fail("global line count disagrees with the network");
                }
                break;
            }
            case QType::torf_1: {
                const auto& a = param_of(item, "stop 1");
                const auto& b = param_of(item, "stop 2");
                auto expect = transit::share_line(net, a, b) ? "yes" : "no";
                if (item.answer_text != expect) fail("share-line answer disagrees with the oracle");
                break;
            }
            case QType::torf_2: {
                const auto& stop = param_of(item, "stop 1");
                const auto& line = param_of(item, "line x");
                if (!net.lines.count(line)) fail("unknown line \"" + line + "\"");
                auto expect = transit::lines_through(net, stop).count(line) ? "yes" : "no";
                if (item.answer_text != expect) fail("on-line answer disagrees with the oracle");
                break;
            }
            case QType::planning: {
                if (!item.answer_route) fail("missing route answer");
                const auto& a = param_of(item, "stop 1");
                const auto& b = param_of(item, "stop 2");
                if (!transit::is_valid_route(net, *item.answer_route)) fail("invalid route");
                if (item.answer_route->segments.front().from != a ||
                    item.answer_route->segments.back().to != b) {
                    fail("route endpoints disagree with the params");
                }
                auto oracle = transit::min_transfer_route(net, a, b);
                if (!oracle) fail("endpoints are disconnected");
                if (!(*oracle == *item.answer_route)) fail("route is not the oracle route");
                if (item.transfer_count != oracle->transfer_count()) {
                    fail("transfer_count disagrees with the oracle route");
                }
                auto expect_qd = item.transfer_count == 0 ? transit::Difficulty::easy
                                                          : transit::Difficulty::hard;
                if (item.question_difficulty != expect_qd) {
                    fail("planning question difficulty must follow the transfer count");
                }
                break;
            }
        }
    } catch (const GenerationError&) {
        throw;
    } catch (const Error& e) {
        fail(e.what());
    }
    if (item.question_text != render_question(item.qtype, item.params, item.options)) {
        fail("question text does not match the template");
    }
}

namespace {

void gen_local_count_1(const transit::TransitNetwork& net, std::uint64_t seed, int count,
                       std::vector<QAItem>& out) {
    if (count <= 0) return;
    auto pool = unambiguous_pairs(net);
    require_quota("local_count_1", pool.size(), count);
    Rng rng(derive_seed(seed, net.network_id, "local_count_1"));
    rng.shuffle(pool);
    for (int k = 0; k < count; ++k) {
        const auto& [a, b] = pool[k];
        auto item = base_item(net, QType::local_count_1, k);
        item.params = {{"stop 1", a}, {"stop 2", b}};
        auto la = transit::lines_through(net, a);
        auto lb = transit::lines_through(net, b);
        std::vector<std::string> shared;
        std::set_intersection(la.begin(), la.end(), lb.begin(), lb.end(),
                              std::back_inserter(shared));
        int truth = transit::intermediate_stop_count(net, shared.front(), a, b);
        auto values = make_distractors(
            truth, derive_seed(seed, net.network_id, "lc1-options", static_cast<std::uint64_t>(k)));
        for (std::size_t i = 0; i < values.size(); ++i) {
            item.options.push_back(std::to_string(values[i]));
            if (values[i] == truth) item.answer_text = std::string(1, static_cast<char>('A' + i));
        }
        item.question_text = render_question(item.qtype, item.params, item.options);
        verify_item(item, net);
        out.push_back(std::move(item));
    }
}

void gen_local_count_2(const transit::TransitNetwork& net, std::uint64_t seed, int count,
                       std::vector<QAItem>& out) {
    if (count <= 0) return;
    auto pool = sorted_stops(net);
    require_quota("local_count_2", pool.size(), count);
    Rng rng(derive_seed(seed, net.network_id, "local_count_2"));
    rng.shuffle(pool);
    for (int k = 0; k < count; ++k) {
        auto item = base_item(net, QType::local_count_2, k);
        item.params = {{"stop 1", pool[k]}};
        item.answer_text = std::to_string(transit::lines_through(net, pool[k]).size());
        item.question_text = render_question(item.qtype, item.params, item.options);
        verify_item(item, net);
        out.push_back(std::move(item));
    }
}

void gen_global_count(const transit::TransitNetwork& net, int count, std::vector<QAItem>& out) {
    if (count <= 0) return;
    auto item = base_item(net, QType::global_count, 0);
    item.answer_text = std::to_string(net.lines.size());
    item.question_text = render_question(item.qtype, item.params, item.options);
    verify_item(item, net);
    out.push_back(std::move(item));
}

void gen_torf_1(const transit::TransitNetwork& net, std::uint64_t seed, int count,
                std::vector<QAItem>& out) {
    if (count <= 0) return;
    auto stops = sorted_stops(net);
    std::vector<std::pair<std::string, std::string>> pool;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        for (std::size_t j = i + 1; j < stops.size(); ++j) {
            pool.emplace_back(stops[i], stops[j]);
        }
    }
    require_quota("torf_1", pool.size(), count);
    Rng rng(derive_seed(seed, net.network_id, "torf_1"));
    rng.shuffle(pool);
    for (int k = 0; k < count; ++k) {
        const auto& [a, b] = pool[k];
        auto item = base_item(net, QType::torf_1, k);
        item.params = {{"stop 1", a}, {"stop 2", b}};
        item.answer_text = transit::share_line(net, a, b) ? "yes" : "no";
        item.question_text = render_question(item.qtype, item.params, item.options);
        verify_item(item, net);
        out.push_back(std::move(item));
    }
}

void gen_torf_2(const transit::TransitNetwork& net, std::uint64_t seed, int count,
                std::vector<QAItem>& out) {
    if (count <= 0) return;
    auto stops = sorted_stops(net);
    auto lines = sorted_lines(net);
    std::vector<std::pair<std::string, std::string>> pool;
    for (const auto& s : stops) {
        for (const auto& l : lines) {
            pool.emplace_back(s, l);
        }
    }
    require_quota("torf_2", pool.size(), count);
    Rng rng(derive_seed(seed, net.network_id, "torf_2"));
    rng.shuffle(pool);
    for (int k = 0; k < count; ++k) {
        const auto& [stop, line] = pool[k];
        auto item = base_item(net, QType::torf_2, k);
        item.params = {{"stop 1", stop}, {"line x", line}};
        item.answer_text = transit::lines_through(net, stop).count(line) ? "yes" : "no";
        item.question_text = render_question(item.qtype, item.params, item.options);
        verify_item(item, net);
        out.push_back(std::move(item));
    }
}

}  // namespace

std::vector<QAItem> generate_planning(const transit::TransitNetwork& net, std::uint64_t seed,
                                      int count) {
    if (count < 0) throw UsageError("planning count must be >= 0");
    std::vector<QAItem> out;
    if (count == 0) return out;
    transit::validate_network(net);
    auto comp = components(net);
    auto stops = sorted_stops(net);
    std::vector<std::pair<std::string, std::string>> pool;
    for (const auto& a : stops) {
        for (const auto& b : stops) {
            if (a != b && comp.at(a) == comp.at(b)) pool.emplace_back(a, b);
        }
    }
    require_quota("planning", pool.size(), count);
    Rng rng(derive_seed(seed, net.network_id, "planning"));
    rng.shuffle(pool);
    for (int k = 0; k < count; ++k) {
        const auto& [a, b] = pool[k];
        auto item = base_item(net, QType::planning, k);
        item.params = {{"stop 1", a}, {"stop 2", b}};
        auto route = transit::min_transfer_route(net, a, b);
        if (!route) {
            throw GenerationError("planning pair " + a + " -> " + b +
                                  " unexpectedly disconnected");
        }
        item.answer_route = *route;
        item.transfer_count = route->transfer_count();
        item.question_difficulty = item.transfer_count == 0 ? transit::Difficulty::easy
                                                            : transit::Difficulty::hard;
        item.question_text = render_question(item.qtype, item.params, item.options);
        verify_item(item, net);
        out.push_back(std::move(item));
    }
    return out;
}

std::vector<QAItem> generate(const transit::TransitNetwork& net, std::uint64_t seed,
                             const Quota& quota) {
    for (int q : {quota.local_count_1, quota.local_count_2, quota.global_count, quota.torf_1,
                  quota.torf_2, quota.planning}) {
        if (q < 0) throw UsageError("quotas must be >= 0");
    }
    if (quota.global_count > 1) {
        throw GenerationError("global_count quota exceeds 1: each network yields one question");
    }
    transit::validate_network(net);
    std::vector<QAItem> out;
    gen_local_count_1(net, seed, quota.local_count_1, out);
    gen_local_count_2(net, seed, quota.local_count_2, out);
    gen_global_count(net, quota.global_count, out);
    gen_torf_1(net, seed, quota.torf_1, out);
    gen_torf_2(net, seed, quota.torf_2, out);
    auto planning = generate_planning(net, seed, quota.planning);
    out.insert(out.end(), planning.begin(), planning.end());
    return out;
}

namespace {

using ParamPair = std::pair<std::string, std::string>;

// Candidate parameter pairs for a torf item with the given answer.
std::vector<ParamPair> torf_candidates(const transit::TransitNetwork& net, QType t,
                                       const std::string& answer) {
    std::vector<ParamPair> out;
    auto stops = sorted_stops(net);
    const bool want_yes = answer == "yes";
    if (t == QType::torf_1) {
        for (std::size_t i = 0; i < stops.size(); ++i) {
            for (std::size_t j = i + 1; j < stops.size(); ++j) {
                if (transit::share_line(net, stops[i], stops[j]) == want_yes) {
                    out.emplace_back(stops[i], stops[j]);
                }
            }
        }
    } else {
        for (const auto& s : stops) {
            auto through = transit::lines_through(net, s);
            for (const auto& l : sorted_lines(net)) {
                if (static_cast<bool>(through.count(l)) == want_yes) {
                    out.emplace_back(s, l);
                }
            }
        }
    }
    return out;
}

ParamPair torf_key(const QAItem& item) {
    if (item.qtype == QType::torf_1) {
        auto mm = std::minmax(param_of(item, "stop 1"), param_of(item, "stop 2"));
        return {mm.first, mm.second};
    }
    return {param_of(item, "stop 1"), param_of(item, "line x")};
}

}  // namespace

std::vector<QAItem> balance_yes_no(const std::vector<QAItem>& items,
                                   const std::map<std::string, transit::TransitNetwork>& networks,
                                   std::uint64_t seed) {
    std::vector<QAItem> out = items;
    for (QType t : {QType::torf_1, QType::torf_2}) {
        std::vector<std::size_t> yes_idx, no_idx;
        std::map<std::string, std::set<ParamPair>> used;  // network -> params in use
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i].qtype != t) continue;
            if (!networks.count(out[i].network_id)) {
                throw UsageError("balance_yes_no: unknown network " + out[i].network_id);
            }
            (out[i].answer_text == "yes" ? yes_idx : no_idx).push_back(i);
            used[out[i].network_id].insert(torf_key(out[i]));
        }
        int diff = static_cast<int>(yes_idx.size()) - static_cast<int>(no_idx.size());
        if (std::abs(diff) <= 1) continue;

        const std::string deficit = diff > 0 ? "no" : "yes";
        auto surplus = diff > 0 ? yes_idx : no_idx;
        Rng rng(derive_seed(seed, "balance", to_string(t)));
        rng.shuffle(surplus);

        // Deficit-answer candidates per network, in seeded random order.
        std::map<std::string, std::vector<ParamPair>> pools;
        auto pool_of = [&](const std::string& net_id) -> std::vector<ParamPair>& {
            auto it = pools.find(net_id);
            if (it == pools.end()) {
                auto cands = torf_candidates(networks.at(net_id), t, deficit);
                Rng prng(derive_seed(seed, "balance-pool", to_string(t), net_id));
                prng.shuffle(cands);
                it = pools.emplace(net_id, std::move(cands)).first;
            }
            return it->second;
        };

        int conversions_needed = std::abs(diff) / 2;
        int converted = 0;
        std::vector<std::size_t> untouched_surplus;
        for (std::size_t idx : surplus) {
            if (converted == conversions_needed) {
                untouched_surplus.push_back(idx);
                continue;
            }
            QAItem& item = out[idx];
            auto& pool = pool_of(item.network_id);
            std::optional<ParamPair> fresh;
            while (!pool.empty()) {
                auto cand = pool.back();
                pool.pop_back();
                auto key = t == QType::torf_1
                               ? ParamPair(std::minmax(cand.first, cand.second))
                               : cand;
                if (used[item.network_id].insert(key).second) {
                    fresh = cand;
                    break;
                }
            }
            if (!fresh) {
                untouched_surplus.push_back(idx);
                continue;
            }
            if (t == QType::torf_1) {
                item.params = {{"stop 1", fresh->first}, {"stop 2", fresh->second}};
            } else {
                item.params = {{"stop 1", fresh->first}, {"line x", fresh->second}};
            }
            item.answer_text = deficit;
            item.question_text = render_question(item.qtype, item.params, item.options);
            verify_item(item, networks.at(item.network_id));
            ++converted;
        }

        int remaining = std::abs(diff) - 2 * converted;
        if (remaining > 1) {
            const int deficit_total =
                static_cast<int>(diff > 0 ? no_idx.size() : yes_idx.size()) + converted;
            if (deficit_total == 0) {
                throw BalanceError("no \"" + deficit + "\" candidates available for " +
                                   to_string(t));
            }
            // Pool-limited: drop surplus items down to a margin of one.
            std::set<std::size_t> drop(untouched_surplus.begin(),
                                       untouched_surplus.begin() + (remaining - 1));
            std::vector<QAItem> kept;
            kept.reserve(out.size() - drop.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                if (!drop.count(i)) kept.push_back(std::move(out[i]));
            }
            out = std::move(kept);
        }
    }
    return out;
}

std::pair<std::vector<QAItem>, std::vector<QAItem>> split_dataset(
    const std::vector<QAItem>& items, const std::set<std::string>& holdout_network_ids) {
    std::set<std::string> observed;
    for (const auto& item : items) observed.insert(item.network_id);
    for (const auto& id : holdout_network_ids) {
        if (!observed.count(id)) {
            throw UsageError("holdout network \"" + id + "\" does not appear in the items");
        }
    }
    std::vector<QAItem> train, test;
    for (const auto& item : items) {
        auto copy = item;
        if (holdout_network_ids.count(item.network_id)) {
            copy.split = Split::test;
            test.push_back(std::move(copy));
        } else {
            copy.split = Split::train;
            train.push_back(std::move(copy));
        }
    }
    if (train.empty() || test.empty()) {
        throw EmptySplitError(train.empty() ? "train split is empty" : "test split is empty");
    }
    return {std::move(train), std::move(test)};
}

}  // namespace metrorl::qa
