#include "metrorl/answer_format.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <regex>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace metrorl::answer {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n\f\v");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(begin, end - begin + 1);
}

bool is_trailing_punct(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::string normalize_scalar(const std::string& raw) {
    std::string s = trim(raw);
    while (!s.empty() && (is_trailing_punct(s.back()) || std::isspace(static_cast<unsigned char>(s.back())))) {
        s.pop_back();
    }
    if (s.empty()) return s;

    static const std::regex int_re(R"([+-]?[0-9]+)");
    if (std::regex_match(s, int_re)) {
        errno = 0;
        char* end = nullptr;
        long long v = std::strtoll(s.c_str(), &end, 10);
        if (errno == 0 && end && *end == '\0') {
            return std::to_string(v);
        }
        return s;  // out of long long range: leave verbatim
    }
    std::string low = lower(s);
    if (low == "yes" || low == "no") return low;
    if (s.size() == 1) {
        char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        if (c >= 'A' && c <= 'D') return std::string(1, c);
    }
    return s;
}

std::string normalize_name(const std::string& raw) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    return out;
}

namespace {

std::optional<std::string> last_boxed_span(const std::string& text) {
    static const std::string marker = "\\boxed{";
    std::optional<std::string> last;
    std::size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string::npos) {
        std::size_t i = pos + marker.size();
        std::size_t content_start = i;
        int depth = 1;
        while (i < text.size() && depth > 0) {
            if (text[i] == '{') ++depth;
            if (text[i] == '}') --depth;
            ++i;
        }
        if (depth != 0) break;  // unterminated; keep the previous complete span
        last = text.substr(content_start, i - 1 - content_start);
        pos = i;
    }
    return last;
}

}  // namespace

ParsedAnswer parse_boxed(const std::string& text) {
    ParsedAnswer out;
    auto span = last_boxed_span(text);
    if (!span) return out;
    std::string value = normalize_scalar(*span);
    if (value.empty()) return out;
    out.kind = AnswerKind::scalar;
    out.scalar_value = std::move(value);
    out.format_ok = true;
    return out;
}

ParsedAnswer parse_route(const std::string& text) {
    ParsedAnswer out;

    // Canonical wire form: a JSON array of {line, from, to}.
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_array()) {
        RouteAnswer route;
        for (const auto& e : j) {
            if (!e.is_object() || !e.contains("line") || !e.contains("from") ||
                !e.contains("to") || !e["line"].is_string() || !e["from"].is_string() ||
                !e["to"].is_string()) {
                return out;
            }
            transit::RouteSegment seg{e["line"].get<std::string>(), e["from"].get<std::string>(),
                                      e["to"].get<std::string>()};
            if (seg.line.empty() || seg.from.empty() || seg.to.empty()) return out;
            route.segments.push_back(std::move(seg));
        }
        if (route.segments.empty()) return out;
        out.kind = AnswerKind::route;
        out.route_value = std::move(route);
        out.format_ok = true;
        return out;
    }

    // Permissive text form, one segment per matching line.
    static const std::regex seg_re(R"(take\s+(.+?)\s+from\s+(.+?)\s+to\s+(.+))",
                                   std::regex::icase);
    RouteAnswer route;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (!std::regex_search(line, m, seg_re)) continue;
        transit::RouteSegment seg{trim(m[1].str()), trim(m[2].str()), trim(m[3].str())};
        if (seg.line.empty() || seg.from.empty() || seg.to.empty()) continue;
        route.segments.push_back(std::move(seg));
    }
    if (route.segments.empty()) return out;
    out.kind = AnswerKind::route;
    out.route_value = std::move(route);
    out.format_ok = true;
    return out;
}

double format_reward(const ParsedAnswer& p) { return p.format_ok ? 1.0 : 0.0; }

RouteAnswer to_route_answer(const transit::Route& r) { return RouteAnswer{r.segments}; }

std::string route_wire_text(const RouteAnswer& r) {
    json arr = json::array();
    for (const auto& seg : r.segments) {
        arr.push_back({{"line", seg.line}, {"from", seg.from}, {"to", seg.to}});
    }
    return arr.dump();
}

}  // namespace metrorl::answer
