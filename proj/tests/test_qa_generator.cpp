#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "metrorl/errors.hpp"
#include "metrorl/qa_generator.hpp"
#include "metrorl/qa_item.hpp"
#include "metrorl/rng.hpp"
#include "metrorl/transit_graph.hpp"

using namespace metrorl;
using namespace metrorl::qa;
using metrorl::transit::Difficulty;
using metrorl::transit::TransitNetwork;

namespace {

TransitNetwork fixture_net() {
    TransitNetwork net;
    net.network_id = "fx";
    net.difficulty = Difficulty::easy;
    net.lines = {{"L1", {"A", "B", "C", "D"}}, {"L2", {"C", "E", "F"}}, {"L3", {"B", "F", "G"}}};
    return net;
}

// Test-side answer re-derivation, written against the raw line vectors rather
// than the library oracles.
int scan_pos(const std::vector<std::string>& stops, const std::string& s) {
    for (std::size_t i = 0; i < stops.size(); ++i) {
        if (stops[i] == s) return static_cast<int>(i);
    }
    return -1;
}

std::set<std::string> scan_lines(const TransitNetwork& net, const std::string& stop) {
    std::set<std::string> out;
    for (const auto& [lname, stops] : net.lines) {
        if (scan_pos(stops, stop) >= 0) out.insert(lname);
    }
    return out;
}

int bfs_min_transfers(const TransitNetwork& net, const std::string& a, const std::string& b) {
    std::set<std::string> frontier = scan_lines(net, a);
    std::set<std::string> seen = frontier;
    const auto goal = scan_lines(net, b);
    int transfers = 0;
    while (!frontier.empty()) {
        for (const auto& l : frontier) {
            if (goal.count(l)) return transfers;
        }
        std::set<std::string> next;
        for (const auto& l : frontier) {
            for (const auto& stop : net.lines.at(l)) {
                for (const auto& l2 : scan_lines(net, stop)) {
                    if (!seen.count(l2)) {
                        next.insert(l2);
                        seen.insert(l2);
                    }
                }
            }
        }
        frontier = std::move(next);
        ++transfers;
    }
    return -1;
}

void recheck_item(const QAItem& item, const TransitNetwork& net) {
    REQUIRE(item.network_id == net.network_id);
    CHECK(item.map_difficulty == net.difficulty);
    switch (item.qtype) {
        case QType::local_count_1: {
            REQUIRE(item.options.size() == 4);
            const auto& a = item.params.at("stop 1");
            const auto& b = item.params.at("stop 2");
            int truth = -1;
            for (const auto& [lname, stops] : net.lines) {
                int pa = scan_pos(stops, a), pb = scan_pos(stops, b);
                if (pa < 0 || pb < 0) continue;
                int c = std::abs(pa - pb) - 1;
                if (truth >= 0) CHECK(c == truth);  // unambiguous across shared lines
                truth = c;
            }
            REQUIRE(truth >= 0);
            REQUIRE(item.answer_text.size() == 1);
            CHECK(item.options[item.answer_text[0] - 'A'] == std::to_string(truth));
            int hits = 0;
            for (const auto& o : item.options) {
                if (o == std::to_string(truth)) ++hits;
            }
            CHECK(hits == 1);
            break;
        }
        case QType::local_count_2:
            CHECK(item.answer_text ==
                  std::to_string(scan_lines(net, item.params.at("stop 1")).size()));
            break;
        case QType::global_count:
            CHECK(item.answer_text == std::to_string(net.lines.size()));
            break;
        case QType::torf_1: {
            const auto la = scan_lines(net, item.params.at("stop 1"));
            const auto lb = scan_lines(net, item.params.at("stop 2"));
            bool shared = false;
            for (const auto& l : la) shared = shared || lb.count(l);
            CHECK(item.answer_text == (shared ? "yes" : "no"));
            break;
        }
        case QType::torf_2: {
            bool on = scan_lines(net, item.params.at("stop 1")).count(item.params.at("line x"));
            CHECK(item.answer_text == (on ? "yes" : "no"));
            break;
        }
        case QType::planning: {
            REQUIRE(item.answer_route.has_value());
            const auto& segs = item.answer_route->segments;
            REQUIRE_FALSE(segs.empty());
            CHECK(segs.front().from == item.params.at("stop 1"));
            CHECK(segs.back().to == item.params.at("stop 2"));
            for (std::size_t i = 0; i < segs.size(); ++i) {
                auto it = net.lines.find(segs[i].line);
                REQUIRE(it != net.lines.end());
                CHECK(scan_pos(it->second, segs[i].from) >= 0);
                CHECK(scan_pos(it->second, segs[i].to) >= 0);
                CHECK(segs[i].from != segs[i].to);
                if (i + 1 < segs.size()) CHECK(segs[i].to == segs[i + 1].from);
            }
            CHECK(item.transfer_count == static_cast<int>(segs.size()) - 1);
            CHECK(item.transfer_count ==
                  bfs_min_transfers(net, item.params.at("stop 1"), item.params.at("stop 2")));
            CHECK(item.question_difficulty ==
                  (item.transfer_count == 0 ? Difficulty::easy : Difficulty::hard));
            break;
        }
    }
    if (item.qtype != QType::planning) {
        CHECK(item.question_difficulty == item.map_difficulty);
        CHECK(item.transfer_count == 0);
    }
}

// A hand-built, already-rendered torf_2 item for balancing tests.
QAItem handmade_torf2(const TransitNetwork& net, int idx, const std::string& stop,
                      const std::string& line, const std::string& ans) {
    QAItem item;
    item.qa_id = net.network_id + "-hand-" + std::to_string(idx);
    item.network_id = net.network_id;
    item.qtype = QType::torf_2;
    item.params = {{"stop 1", stop}, {"line x", line}};
    item.answer_text = ans;
    item.map_difficulty = net.difficulty;
    item.question_difficulty = net.difficulty;
    item.question_text = render_question(item.qtype, item.params, item.options);
    return item;
}

}  // namespace

TEST_CASE("templates render byte-exact") {
    CHECK(render_question(QType::local_count_1, {{"stop 1", "A"}, {"stop 2", "D"}},
                          {"2", "0", "3", "1"}) ==
          "Please solve the multiple choice problem and put your answer (one of ABCD) in one "
          "\"\\boxed{}\". According to the subway map, how many intermediate stops are there "
          "between A and D (except for this two stops)?\nA) 2\nB) 0\nC) 3\nD) 1");
    CHECK(render_question(QType::local_count_2, {{"stop 1", "Harbor"}}, {}) ==
          "Please solve the problem and put your answer in one \"\\boxed{}\". According to the "
          "subway map, how many lines pass through Harbor?");
    CHECK(render_question(QType::global_count, {}, {}) ==
          "Please solve the problem and put your answer in one \"\\boxed{}\". According to the "
          "subway map, how many subway (metro) lines are there in total?");
    CHECK(render_question(QType::torf_1, {{"stop 1", "A"}, {"stop 2", "B"}}, {}) ==
          "Please solve the problem and put your answer (only answer yes or no) in one "
          "\"\\boxed{}\". According to the subway map, is it true that A is the same line as B?");
    CHECK(render_question(QType::torf_2, {{"stop 1", "Central"}, {"line x", "L01"}}, {}) ==
          "Please solve the problem and put your answer (only answer yes or no) in one "
          "\"\\boxed{}\". According to the subway map, is it true that Central is on the L01?");
    CHECK(render_question(QType::planning, {{"stop 1", "A"}, {"stop 2", "F"}}, {}) ==
          "Plan a route from A to F, listing each line and transfer.");
}

TEST_CASE("make_distractors invariants") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        for (int truth : {0, 1, 2, 5}) {
            auto opts = make_distractors(truth, seed);
            REQUIRE(opts.size() == 4);
            CHECK(std::set<int>(opts.begin(), opts.end()).size() == 4);
            CHECK(std::count(opts.begin(), opts.end(), truth) == 1);
            for (int v : opts) {
                CHECK(v >= 0);
                CHECK(std::abs(v - truth) <= 3);
            }
        }
    }
    // true_count=0: options are 0 plus three values from the near window.
    auto zero = make_distractors(0, 42);
    CHECK(std::count(zero.begin(), zero.end(), 0) == 1);
    for (int v : zero) {
        CHECK(v <= 4);
    }
    CHECK_THROWS_AS(make_distractors(-1, 0), UsageError);
}

TEST_CASE("correct letter is uniform across seeds") {
    int counts[4] = {0, 0, 0, 0};
    const int trials = 1000;
    for (int seed = 0; seed < trials; ++seed) {
        auto opts = make_distractors(3, static_cast<std::uint64_t>(seed));
        auto it = std::find(opts.begin(), opts.end(), 3);
        ++counts[it - opts.begin()];
    }
    double chi2 = 0.0;
    for (int c : counts) {
        double diff = c - trials / 4.0;
        chi2 += diff * diff / (trials / 4.0);
    }
    CHECK(chi2 < 16.27);  // chi-square 0.999 quantile, 3 dof
}

TEST_CASE("generate respects quotas and verifies answers") {
    auto net = fixture_net();
    Quota quota;
    quota.local_count_1 = 3;
    quota.local_count_2 = 4;
    quota.global_count = 1;
    quota.torf_1 = 5;
    quota.torf_2 = 6;
    quota.planning = 4;
    auto items = generate(net, 11, quota);
    CHECK(items.size() == 23);

    std::map<QType, int> counts;
    for (const auto& item : items) {
        ++counts[item.qtype];
        recheck_item(item, net);
        CHECK_NOTHROW(verify_item(item, net));
    }
    CHECK(counts[QType::local_count_1] == 3);
    CHECK(counts[QType::local_count_2] == 4);
    CHECK(counts[QType::global_count] == 1);
    CHECK(counts[QType::torf_1] == 5);
    CHECK(counts[QType::torf_2] == 6);
    CHECK(counts[QType::planning] == 4);

    // Unique ids.
    std::set<std::string> ids;
    for (const auto& item : items) ids.insert(item.qa_id);
    CHECK(ids.size() == items.size());

    // The global count answer is the line count.
    for (const auto& item : items) {
        if (item.qtype == QType::global_count) CHECK(item.answer_text == "3");
    }

    // Determinism.
    CHECK(generate(net, 11, quota) == items);
    CHECK(generate(net, 12, quota) != items);
}

TEST_CASE("generated answers survive an oracle re-check at scale") {
    transit::SyntheticSpec spec;
    spec.line_count = 5;
    spec.transfer_density = 0.3;
    Quota quota;
    quota.local_count_1 = 4;
    quota.local_count_2 = 4;
    quota.global_count = 1;
    quota.torf_1 = 4;
    quota.torf_2 = 4;
    quota.planning = 4;
    int total = 0;
    for (std::uint64_t seed = 900; seed < 910; ++seed) {
        transit::SyntheticSpec s = spec;
        s.network_id = "net" + std::to_string(seed);
        auto net = transit::generate_synthetic_network(seed, s);
        auto items = generate(net, seed, quota);
        for (const auto& item : items) {
            recheck_item(item, net);
        }
        total += static_cast<int>(items.size());
    }
    CHECK(total >= 200);
}

TEST_CASE("unsatisfiable quotas fail loudly") {
    auto net = fixture_net();
    Quota q;
    q.global_count = 2;
    CHECK_THROWS_WITH_AS(static_cast<void>(generate(net, 1, q)),
                         doctest::Contains("global_count"), GenerationError);
    q = Quota{};
    q.local_count_1 = 10000;
    CHECK_THROWS_WITH_AS(static_cast<void>(generate(net, 1, q)),
                         doctest::Contains("local_count_1"), GenerationError);
    q = Quota{};
    q.torf_2 = 10000;
    CHECK_THROWS_WITH_AS(static_cast<void>(generate(net, 1, q)), doctest::Contains("torf_2"),
                         GenerationError);
    q = Quota{};
    q.planning = -1;
    CHECK_THROWS_AS(static_cast<void>(generate(net, 1, q)), UsageError);
}

TEST_CASE("planning generation") {
    TransitNetwork single;
    single.network_id = "solo";
    single.difficulty = Difficulty::easy;
    single.lines = {{"L1", {"A", "B", "C", "D", "E"}}};
    auto items = generate_planning(single, 3, 5);
    CHECK(items.size() == 5);
    for (const auto& item : items) {
        CHECK(item.transfer_count == 0);
        CHECK(item.question_difficulty == Difficulty::easy);
        recheck_item(item, single);
    }

    // A pair that needs one transfer.
    auto net = fixture_net();
    auto all = generate_planning(net, 3, 20);
    bool saw_transfer = false;
    for (const auto& item : all) {
        recheck_item(item, net);
        if (item.transfer_count >= 1) {
            saw_transfer = true;
            CHECK(item.question_difficulty == Difficulty::hard);
        }
    }
    CHECK(saw_transfer);

    CHECK(generate_planning(net, 3, 20) == all);
    CHECK_THROWS_WITH_AS(static_cast<void>(generate_planning(single, 1, 10000)),
                         doctest::Contains("planning"), GenerationError);
}

TEST_CASE("yes/no balancing by resampling") {
    auto net = fixture_net();
    std::map<std::string, TransitNetwork> nets = {{net.network_id, net}};

    // Build a deliberately yes-heavy torf_2 pool: every (stop, line) membership.
    std::vector<QAItem> items;
    int idx = 0;
    for (const auto& [lname, stops] : net.lines) {
        for (const auto& s : stops) {
            items.push_back(handmade_torf2(net, idx++, s, lname, "yes"));
        }
    }
    REQUIRE(items.size() == 10);

    auto balanced = balance_yes_no(items, nets, 7);
    int yes = 0, no = 0;
    for (const auto& item : balanced) {
        REQUIRE(item.qtype == QType::torf_2);
        CHECK_NOTHROW(verify_item(item, net));
        (item.answer_text == "yes" ? yes : no)++;
    }
    CHECK(std::abs(yes - no) <= 1);
    CHECK(yes + no == 10);  // enough "no" candidates: nothing dropped

    // Params changed only on converted items; answers never flipped in place.
    for (std::size_t i = 0; i < balanced.size(); ++i) {
        if (balanced[i].params == items[i].params) {
            CHECK(balanced[i].answer_text == items[i].answer_text);
        } else {
            CHECK(balanced[i].answer_text == "no");
        }
    }

    // Determinism and fixed point.
    CHECK(balance_yes_no(items, nets, 7) == balanced);
    CHECK(balance_yes_no(balanced, nets, 99) == balanced);
}

TEST_CASE("balancing drops surplus when the pool runs dry") {
    TransitNetwork net;
    net.network_id = "tiny";
    net.difficulty = Difficulty::easy;
    net.lines = {{"L1", {"A", "B", "C", "D"}}, {"L2", {"B", "C", "D", "E"}}};
    std::map<std::string, TransitNetwork> nets = {{net.network_id, net}};

    // All 8 memberships as yes items; only 2 "no" candidates exist (A/L2, E/L1).
    std::vector<QAItem> items;
    int idx = 0;
    for (const auto& [lname, stops] : net.lines) {
        for (const auto& s : stops) {
            items.push_back(handmade_torf2(net, idx++, s, lname, "yes"));
        }
    }
    auto balanced = balance_yes_no(items, nets, 5);
    int yes = 0, no = 0;
    for (const auto& item : balanced) (item.answer_text == "yes" ? yes : no)++;
    CHECK(no == 2);
    CHECK(yes == 3);
    for (const auto& item : balanced) CHECK_NOTHROW(verify_item(item, net));
}

TEST_CASE("balancing fails only when the deficit side is unreachable") {
    TransitNetwork net;
    net.network_id = "dup";
    net.difficulty = Difficulty::easy;
    net.lines = {{"L1", {"A", "B", "C"}}, {"L2", {"A", "B", "C"}}};  // every stop on every line
    std::map<std::string, TransitNetwork> nets = {{net.network_id, net}};
    std::vector<QAItem> items;
    int idx = 0;
    for (const auto& [lname, stops] : net.lines) {
        for (const auto& s : stops) {
            items.push_back(handmade_torf2(net, idx++, s, lname, "yes"));
        }
    }
    CHECK_THROWS_AS(static_cast<void>(balance_yes_no(items, nets, 1)), BalanceError);
}

TEST_CASE("balancing leaves non-torf items untouched") {
    auto net = fixture_net();
    std::map<std::string, TransitNetwork> nets = {{net.network_id, net}};
    Quota quota;
    quota.local_count_2 = 3;
    quota.global_count = 1;
    quota.torf_2 = 6;
    auto items = generate(net, 21, quota);
    auto balanced = balance_yes_no(items, nets, 3);
    REQUIRE(balanced.size() == items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].qtype != QType::torf_1 && items[i].qtype != QType::torf_2) {
            CHECK(balanced[i] == items[i]);
        }
    }
    int yes = 0, no = 0;
    for (const auto& item : balanced) {
        if (item.qtype == QType::torf_2) (item.answer_text == "yes" ? yes : no)++;
    }
    CHECK(std::abs(yes - no) <= 1);
}

TEST_CASE("dataset splitting") {
    transit::SyntheticSpec spec;
    spec.line_count = 3;
    std::vector<QAItem> items;
    std::set<std::string> holdout;
    for (int n = 0; n < 30; ++n) {
        transit::SyntheticSpec s = spec;
        s.network_id = "city" + std::to_string(n);
        auto net = transit::generate_synthetic_network(static_cast<std::uint64_t>(n), s);
        Quota q;
        q.torf_1 = 2;
        q.local_count_2 = 2;
        auto batch = generate(net, static_cast<std::uint64_t>(n), q);
        items.insert(items.end(), batch.begin(), batch.end());
        if (n >= 19) holdout.insert(s.network_id);
    }
    auto [train, test] = split_dataset(items, holdout);
    CHECK(train.size() + test.size() == items.size());
    CHECK(test.size() == 11u * 4u);
    for (const auto& item : train) {
        CHECK(item.split == Split::train);
        CHECK_FALSE(holdout.count(item.network_id));
    }
    for (const auto& item : test) {
        CHECK(item.split == Split::test);
        CHECK(holdout.count(item.network_id));
    }

    CHECK_THROWS_AS(static_cast<void>(split_dataset(items, {})), EmptySplitError);
    std::set<std::string> everything;
    for (const auto& item : items) everything.insert(item.network_id);
    CHECK_THROWS_AS(static_cast<void>(split_dataset(items, everything)), EmptySplitError);
    CHECK_THROWS_AS(static_cast<void>(split_dataset(items, {"nope"})), UsageError);
}

TEST_CASE("jsonl round trip") {
    auto net = fixture_net();
    Quota quota;
    quota.local_count_1 = 2;
    quota.local_count_2 = 2;
    quota.global_count = 1;
    quota.torf_1 = 2;
    quota.torf_2 = 2;
    quota.planning = 3;
    auto items = generate(net, 77, quota);
    auto text = items_to_jsonl(items);
    // One line per item.
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(items.size()));
    auto back = items_from_jsonl(text);
    CHECK(back == items);
    CHECK_THROWS_AS(static_cast<void>(item_from_json_line("{broken")), ParseError);
    CHECK_THROWS_AS(static_cast<void>(item_from_json_line("{}")), ParseError);
}
