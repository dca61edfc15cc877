#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace metrorl::transit {

enum class Difficulty { easy, medium, hard };

std::string to_string(Difficulty d);
Difficulty difficulty_from_string(const std::string& s);

/// A transit network: named lines as ordered stop sequences over a shared stop
/// universe. Treated as immutable after load/generation; every oracle below is
/// a pure read, safe for concurrent use.
struct TransitNetwork {
    std::string network_id;
    Difficulty difficulty = Difficulty::easy;
    std::map<std::string, std::vector<std::string>> lines;  // line name -> ordered stops

    bool operator==(const TransitNetwork&) const = default;
};

struct RouteSegment {
    std::string line;
    std::string from;
    std::string to;

    bool operator==(const RouteSegment&) const = default;
};

/// A concrete ride: each segment travels along one line, consecutive segments
/// chain end-to-start. Transfers = segments - 1.
struct Route {
    std::vector<RouteSegment> segments;

    int transfer_count() const { return static_cast<int>(segments.size()) - 1; }

    bool operator==(const Route&) const = default;
};

/// Throws ValidationError unless every network invariant holds
/// (every line >= 2 stops, no stop repeated within a line).
void validate_network(const TransitNetwork& net);

/// Parses and validates the network document format:
///   {"network_id": str, "difficulty": "easy|medium|hard", "lines": {name: [stop, ...]}}
/// Throws ParseError (with location) on malformed input, ValidationError on
/// invariant violations. load_network(save_network(net)) == net.
TransitNetwork load_network(const std::string& json_text);
TransitNetwork load_network_file(const std::string& path);
std::string save_network(const TransitNetwork& net);
void save_network_file(const TransitNetwork& net, const std::string& path);

std::set<std::string> all_stops(const TransitNetwork& net);
bool has_stop(const TransitNetwork& net, const std::string& stop);

/// Number of stops strictly between a and b along `line`. Direction-free.
/// Throws DomainError if the line is unknown, a stop is not on it, or a == b.
int intermediate_stop_count(const TransitNetwork& net, const std::string& line,
                            const std::string& a, const std::string& b);

/// Exact set of lines whose sequence contains `stop`. Throws DomainError if
/// the stop appears nowhere.
std::set<std::string> lines_through(const TransitNetwork& net, const std::string& stop);

/// True iff some line carries both stops. Throws DomainError on unknown stops.
bool share_line(const TransitNetwork& net, const std::string& a, const std::string& b);

/// Minimum-transfer route from a to b, or nullopt if disconnected.
/// Ties broken by fewest total traversed stops, then by lexicographic line-name
/// sequence, then by lexicographic transfer-stop names; fully deterministic.
/// Search runs on the line-expanded graph: node = (stop, line), riding along a
/// line costs 0 transfers, switching lines at a shared stop costs 1.
/// Throws DomainError on unknown stops or a == b.
std::optional<Route> min_transfer_route(const TransitNetwork& net, const std::string& a,
                                        const std::string& b);

/// True iff every segment's stops lie on its named line with from != to, and
/// consecutive segments chain. Independent of the route search.
bool is_valid_route(const TransitNetwork& net, const Route& r);

struct SyntheticSpec {
    std::string network_id = "net";
    int line_count = 5;
    int stops_per_line_min = 4;
    int stops_per_line_max = 8;
    double transfer_density = 0.25;  // target fraction of multi-line stops
    // Difficulty label thresholds on line count.
    int easy_max_lines = 3;
    int medium_max_lines = 7;
};

/// Deterministic synthetic network per seed. Multi-line stop fraction tracks
/// spec.transfer_density; reused stops tie each line to the earlier ones, so
/// positive density keeps the network connected in practice.
/// Throws GenerationError if the spec is infeasible.
TransitNetwork generate_synthetic_network(std::uint64_t seed, const SyntheticSpec& spec);

}  // namespace metrorl::transit
