#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metrorl/transit_graph.hpp"

namespace metrorl::answer {

/// A candidate route as parsed from model output: raw strings, not yet checked
/// against any network.
struct RouteAnswer {
    std::vector<transit::RouteSegment> segments;

    bool operator==(const RouteAnswer&) const = default;
};

enum class AnswerKind { scalar, route, malformed };

struct ParsedAnswer {
    AnswerKind kind = AnswerKind::malformed;
    std::optional<std::string> scalar_value;  // normalized (integer | yes/no | letter A-D)
    std::optional<RouteAnswer> route_value;
    bool format_ok = false;
};

/// Canonical scalar normalization: trim, strip trailing sentence punctuation,
/// canonical integer form, lowercase yes/no, uppercase single letter A-D.
/// Anything else passes through trimmed. Idempotent.
std::string normalize_scalar(const std::string& raw);

/// Name key used when scoring routes against a network: lowercase with runs of
/// whitespace collapsed to single spaces. The graph layer itself stays exact.
std::string normalize_name(const std::string& raw);

/// Extracts the content of the last complete \boxed{...} span and normalizes
/// it. kind=malformed when no complete span exists or the content is empty.
/// Total: never throws.
ParsedAnswer parse_boxed(const std::string& text);

/// Accepts either the canonical wire form (JSON array of {line, from, to}) or
/// the permissive text form: every text line matching
///   take\s+(.+?)\s+from\s+(.+?)\s+to\s+(.+)     (case-insensitive)
/// contributes one segment; other lines are skipped. At least one segment with
/// no empty fields is required, else kind=malformed. Total: never throws.
ParsedAnswer parse_route(const std::string& text);

/// Binary compliance gate: 1.0 if format_ok else 0.0.
double format_reward(const ParsedAnswer& p);

RouteAnswer to_route_answer(const transit::Route& r);

/// Canonical wire serialization; parse_route() round-trips it exactly.
std::string route_wire_text(const RouteAnswer& r);

}  // namespace metrorl::answer
