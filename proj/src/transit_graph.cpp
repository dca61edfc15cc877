#include "metrorl/transit_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "metrorl/errors.hpp"
#include "metrorl/rng.hpp"

using nlohmann::json;

namespace metrorl::transit {

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "easy";
        case Difficulty::medium: return "medium";
        case Difficulty::hard: return "hard";
    }
    throw UsageError("invalid difficulty value");
}

Difficulty difficulty_from_string(const std::string& s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "medium") return Difficulty::medium;
    if (s == "hard") return Difficulty::hard;
    throw ParseError("unknown difficulty \"" + s + "\" (expected easy|medium|hard)");
}

void validate_network(const TransitNetwork& net) {
    if (net.network_id.empty()) {
        throw ValidationError("network_id must be non-empty");
    }
    for (const auto& [name, stops] : net.lines) {
        if (name.empty()) {
            throw ValidationError("line with empty name");
        }
        if (stops.size() < 2) {
            throw ValidationError("line \"" + name + "\" has fewer than 2 stops");
        }
        std::set<std::string> seen;
        for (const auto& s : stops) {
            if (s.empty()) {
                throw ValidationError("line \"" + name + "\" contains an empty stop name");
            }
            if (!seen.insert(s).second) {
                throw ValidationError("line \"" + name + "\" repeats stop \"" + s + "\"");
            }
        }
    }
}

namespace {

// SAX pass that only detects duplicate object keys. The DOM parser silently
// keeps the last duplicate, which would swallow a duplicated line name.
struct DupKeyFinder {
    std::vector<std::set<std::string>> open_objects;
    std::vector<std::string> object_names;  // key under which each open object appeared
    std::string last_key;
    bool found = false;
    std::string dup_key;
    std::string dup_parent;

    bool null() { return true; }
    bool boolean(bool) { return true; }
    bool number_integer(json::number_integer_t) { return true; }
    bool number_unsigned(json::number_unsigned_t) { return true; }
    bool number_float(json::number_float_t, const std::string&) { return true; }
    bool string(std::string&) { return true; }
    bool binary(json::binary_t&) { return true; }
    bool start_object(std::size_t) {
        object_names.push_back(last_key);
        open_objects.emplace_back();
        last_key.clear();
        return true;
    }
    bool key(std::string& k) {
        if (!open_objects.back().insert(k).second && !found) {
            found = true;
            dup_key = k;
            dup_parent = object_names.back();
        }
        last_key = k;
        return true;
    }
    bool end_object() {
        open_objects.pop_back();
        object_names.pop_back();
        return true;
    }
    bool start_array(std::size_t) {
        last_key.clear();
        return true;
    }
    bool end_array() { return true; }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) {
        return false;
    }
};

}  // namespace

TransitNetwork load_network(const std::string& json_text) {
    DupKeyFinder dups;
    json::sax_parse(json_text, &dups);
    if (dups.found) {
        if (dups.dup_parent == "lines") {
            throw ValidationError("duplicate line name \"" + dups.dup_key + "\"");
        }
        throw ParseError("duplicate field \"" + dups.dup_key + "\" in network document");
    }

    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("network document: ") + e.what());
    }

    TransitNetwork net;
    try {
        net.network_id = j.at("network_id").get<std::string>();
        net.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
        const json& lines = j.at("lines");
        if (!lines.is_object()) {
            throw ParseError("network document: field \"lines\" must be an object");
        }
        for (auto it = lines.begin(); it != lines.end(); ++it) {
            net.lines[it.key()] = it.value().get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("network document: ") + e.what());
    }

    validate_network(net);
    return net;
}

TransitNetwork load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open network file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_network(buf.str());
    } catch (const Error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string save_network(const TransitNetwork& net) {
    json j;
    j["network_id"] = net.network_id;
    j["difficulty"] = to_string(net.difficulty);
    j["lines"] = net.lines;
    return j.dump(2) + "\n";
}

void save_network_file(const TransitNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write network file: " + path);
    }
    out << save_network(net);
}

std::set<std::string> all_stops(const TransitNetwork& net) {
    std::set<std::string> out;
    for (const auto& [name, stops] : net.lines) {
        out.insert(stops.begin(), stops.end());
    }
    return out;
}

bool has_stop(const TransitNetwork& net, const std::string& stop) {
    for (const auto& [name, stops] : net.lines) {
        if (std::find(stops.begin(), stops.end(), stop) != stops.end()) {
            return true;
        }
    }
    return false;
}

int intermediate_stop_count(const TransitNetwork& net, const std::string& line,
                            const std::string& a, const std::string& b) {
    auto it = net.lines.find(line);
    if (it == net.lines.end()) {
        throw DomainError("unknown line \"" + line + "\"");
    }
    if (a == b) {
        throw DomainError("intermediate_stop_count requires distinct stops");
    }
    const auto& stops = it->second;
    auto pa = std::find(stops.begin(), stops.end(), a);
    auto pb = std::find(stops.begin(), stops.end(), b);
    if (pa == stops.end()) {
        throw DomainError("stop \"" + a + "\" is not on line \"" + line + "\"");
    }
    if (pb == stops.end()) {
        throw DomainError("stop \"" + b + "\" is not on line \"" + line + "\"");
    }
    return static_cast<int>(std::abs(std::distance(pa, pb))) - 1;
}

std::set<std::string> lines_through(const TransitNetwork& net, const std::string& stop) {
    std::set<std::string> out;
    for (const auto& [name, stops] : net.lines) {
        if (std::find(stops.begin(), stops.end(), stop) != stops.end()) {
            out.insert(name);
        }
    }
    if (out.empty()) {
        throw DomainError("unknown stop \"" + stop + "\"");
    }
    return out;
}

bool share_line(const TransitNetwork& net, const std::string& a, const std::string& b) {
    auto la = lines_through(net, a);
    auto lb = lines_through(net, b);
    for (const auto& l : la) {
        if (lb.count(l)) {
            return true;
        }
    }
    return false;
}

namespace {

int stop_pos(const std::vector<std::string>& stops, const std::string& s) {
    auto it = std::find(stops.begin(), stops.end(), s);
    return static_cast<int>(std::distance(stops.begin(), it));
}

// Hop count and chosen transfer stops for one candidate line sequence,
// or nullopt if no stop assignment with nonempty segments exists.
struct SeqCost {
    int hops;
    std::vector<std::string> transfer_stops;
};

std::optional<SeqCost> best_stops_for_sequence(const TransitNetwork& net,
                                               const std::vector<std::string>& seq,
                                               const std::string& a, const std::string& b) {
    // DP over boarding stops, level i = boarding stop of seq[i].
    struct Val {
        int hops;
        std::vector<std::string> stops;
        bool operator<(const Val& o) const {
            if (hops != o.hops) return hops < o.hops;
            return stops < o.stops;
        }
    };
    std::map<std::string, Val> level;
    level[a] = Val{0, {}};
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const auto& cur_stops = net.lines.at(seq[i]);
        const auto& next_stops = net.lines.at(seq[i + 1]);
        std::set<std::string> shared;
        std::set<std::string> next_set(next_stops.begin(), next_stops.end());
        for (const auto& s : cur_stops) {
            if (next_set.count(s)) {
                shared.insert(s);
            }
        }
        std::map<std::string, Val> next_level;
        for (const auto& [board, val] : level) {
            int bp = stop_pos(cur_stops, board);
            for (const auto& t : shared) {
                if (t == board) continue;  // segments must ride at least one hop
                Val cand{val.hops + std::abs(stop_pos(cur_stops, t) - bp), val.stops};
                cand.stops.push_back(t);
                auto it = next_level.find(t);
                if (it == next_level.end() || cand < it->second) {
                    next_level[t] = std::move(cand);
                }
            }
        }
        level = std::move(next_level);
        if (level.empty()) {
            return std::nullopt;
        }
    }
    const auto& last_stops = net.lines.at(seq.back());
    int bpos = stop_pos(last_stops, b);
    std::optional<Val> best;
    for (const auto& [board, val] : level) {
        if (board == b) continue;
        Val cand{val.hops + std::abs(bpos - stop_pos(last_stops, board)), val.stops};
        if (!best || cand < *best) {
            best = std::move(cand);
        }
    }
    if (!best) {
        return std::nullopt;
    }
    return SeqCost{best->hops, best->stops};
}

}  // namespace

std::optional<Route> min_transfer_route(const TransitNetwork& net, const std::string& a,
                                        const std::string& b) {
    if (a == b) {
        throw DomainError("route endpoints must be distinct");
    }
    auto lines_a = lines_through(net, a);  // throws on unknown stop
    auto lines_b = lines_through(net, b);

    // Line graph: lines adjacent when they share a stop.
    std::map<std::string, std::set<std::string>> stop_lines;
    for (const auto& [name, stops] : net.lines) {
        for (const auto& s : stops) {
            stop_lines[s].insert(name);
        }
    }
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& [stop, ls] : stop_lines) {
        for (const auto& l1 : ls) {
            for (const auto& l2 : ls) {
                if (l1 != l2) {
                    adj[l1].insert(l2);
                }
            }
        }
    }

    // Multi-source BFS from the destination's lines; dist = transfers remaining.
    std::map<std::string, int> dist_to_b;
    std::deque<std::string> queue;
    for (const auto& l : lines_b) {
        dist_to_b[l] = 0;
        queue.push_back(l);
    }
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (const auto& nxt : adj[cur]) {
            if (!dist_to_b.count(nxt)) {
                dist_to_b[nxt] = dist_to_b[cur] + 1;
                queue.push_back(nxt);
            }
        }
    }

    int min_transfers = -1;
    for (const auto& l : lines_a) {
        auto it = dist_to_b.find(l);
        if (it != dist_to_b.end() && (min_transfers < 0 || it->second < min_transfers)) {
            min_transfers = it->second;
        }
    }
    if (min_transfers < 0) {
        return std::nullopt;  // disconnected
    }

    // Enumerate minimum-length line sequences in lexicographic order; keep the
    // best (hops, line sequence, transfer stops).
    struct Best {
        SeqCost cost;
        std::vector<std::string> seq;
    };
    std::optional<Best> best;
    std::vector<std::string> seq;
    auto consider = [&](const std::vector<std::string>& candidate) {
        auto cost = best_stops_for_sequence(net, candidate, a, b);
        if (!cost) return;
        if (!best || cost->hops < best->cost.hops ||
            (cost->hops == best->cost.hops &&
             (candidate < best->seq ||
              (candidate == best->seq && cost->transfer_stops < best->cost.transfer_stops)))) {
            best = Best{*cost, candidate};
        }
    };
    std::function<void()> extend = [&]() {
        int remaining = min_transfers - static_cast<int>(seq.size()) + 1;
        if (remaining == 0) {
            consider(seq);
            return;
        }
        for (const auto& nxt : adj[seq.back()]) {
            auto it = dist_to_b.find(nxt);
            if (it != dist_to_b.end() && it->second == remaining - 1) {
                seq.push_back(nxt);
                extend();
                seq.pop_back();
            }
        }
    };
    for (const auto& start : lines_a) {
        if (dist_to_b.count(start) && dist_to_b.at(start) == min_transfers) {
            seq = {start};
            extend();
        }
    }
    if (!best) {
        return std::nullopt;
    }

    Route route;
    std::string board = a;
    for (std::size_t i = 0; i < best->seq.size(); ++i) {
        std::string arrive = (i < best->cost.transfer_stops.size()) ? best->cost.transfer_stops[i] : b;
        route.segments.push_back(RouteSegment{best->seq[i], board, arrive});
        board = arrive;
    }
    return route;
}

bool is_valid_route(const TransitNetwork& net, const Route& r) {
    if (r.segments.empty()) {
        return false;
    }
    for (std::size_t i = 0; i < r.segments.size(); ++i) {
        const auto& seg = r.segments[i];
        auto it = net.lines.find(seg.line);
        if (it == net.lines.end()) {
            return false;
        }
        const auto& stops = it->second;
        if (seg.from == seg.to) {
            return false;
        }
        if (std::find(stops.begin(), stops.end(), seg.from) == stops.end() ||
            std::find(stops.begin(), stops.end(), seg.to) == stops.end()) {
            return false;
        }
        if (i + 1 < r.segments.size() && seg.to != r.segments[i + 1].from) {
            return false;
        }
    }
    return true;
}

TransitNetwork generate_synthetic_network(std::uint64_t seed, const SyntheticSpec& spec) {
    if (spec.line_count < 1) {
        throw GenerationError("line_count must be >= 1");
    }
    if (spec.stops_per_line_min < 2 || spec.stops_per_line_max < spec.stops_per_line_min) {
        throw GenerationError("stops-per-line range must satisfy 2 <= min <= max");
    }
    if (spec.transfer_density < 0.0 || spec.transfer_density > 1.0) {
        throw GenerationError("transfer_density must lie in [0, 1]");
    }

    Rng rng(derive_seed(seed, "synthetic-network"));

    std::vector<int> lens(spec.line_count);
    int total = 0;
    for (auto& len : lens) {
        len = spec.stops_per_line_min +
              rng.below_int(spec.stops_per_line_max - spec.stops_per_line_min + 1);
        total += len;
    }

    // With r reused slots, unique stops = total - r and (reusing previously
    // single-line stops) multi-line stops = r, so density d solves to
    // r = d * total / (1 + d).
    int reuse_total = static_cast<int>(
        std::llround(spec.transfer_density * total / (1.0 + spec.transfer_density)));
    if (spec.line_count == 1 && reuse_total > 0) {
        throw GenerationError("transfer_density " + std::to_string(spec.transfer_density) +
                              " unattainable with a single line");
    }
    if (reuse_total > total - lens[0]) {
        throw GenerationError("transfer_density too high for the given line sizes");
    }

    std::vector<int> reuse(spec.line_count, 0);
    int budget = reuse_total;
    for (int i = 1; i < spec.line_count && budget > 0; ++i) {
        reuse[i] = 1;  // tie each line to the earlier ones when budget allows
        --budget;
    }
    while (budget > 0) {
        std::vector<int> capable;
        for (int i = 1; i < spec.line_count; ++i) {
            if (reuse[i] < lens[i]) {
                capable.push_back(i);
            }
        }
        if (capable.empty()) {
            throw GenerationError("cannot place all transfer stops with the given line sizes");
        }
        ++reuse[capable[rng.below(capable.size())]];
        --budget;
    }

    TransitNetwork net;
    net.network_id = spec.network_id;
    net.difficulty = spec.line_count <= spec.easy_max_lines      ? Difficulty::easy
                     : spec.line_count <= spec.medium_max_lines ? Difficulty::medium
                                                                : Difficulty::hard;

    int fresh_counter = 0;
    auto fresh_stop = [&fresh_counter]() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "S%03d", ++fresh_counter);
        return std::string(buf);
    };
    auto line_name = [](int i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "L%02d", i + 1);
        return std::string(buf);
    };

    std::map<std::string, int> stop_line_count;
    for (int i = 0; i < spec.line_count; ++i) {
        std::vector<std::string> stops(lens[i]);
        std::set<std::string> in_line;

        std::vector<int> positions(lens[i]);
        for (int p = 0; p < lens[i]; ++p) {
            positions[p] = p;
        }
        rng.shuffle(positions);
        positions.resize(reuse[i]);
        std::sort(positions.begin(), positions.end());

        for (int p : positions) {
            // Prefer stops still on a single line; that keeps achieved density
            // close to the target.
            std::vector<std::string> candidates;
            for (const auto& [s, cnt] : stop_line_count) {
                if (cnt == 1 && !in_line.count(s)) {
                    candidates.push_back(s);
                }
            }
            if (candidates.empty()) {
                for (const auto& [s, cnt] : stop_line_count) {
                    if (!in_line.count(s)) {
                        candidates.push_back(s);
                    }
                }
            }
            if (candidates.empty()) {
                throw GenerationError("no distinct stop available to reuse on line " +
                                      line_name(i));
            }
            stops[p] = candidates[rng.below(candidates.size())];
            in_line.insert(stops[p]);
        }
        for (int p = 0; p < lens[i]; ++p) {
            if (stops[p].empty()) {
                stops[p] = fresh_stop();
                in_line.insert(stops[p]);
            }
        }
        for (const auto& s : stops) {
            ++stop_line_count[s];
        }
        net.lines[line_name(i)] = std::move(stops);
    }

    validate_network(net);
    return net;
}

}  // namespace metrorl::transit
