#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metrorl/transit_graph.hpp"

namespace metrorl::qa {

enum class QType { local_count_1, local_count_2, global_count, torf_1, torf_2, planning };

std::string to_string(QType t);
QType qtype_from_string(const std::string& s);

enum class Split { train, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

/// One generated question. Scalar answers live in answer_text in canonical
/// normalized form; planning answers live in answer_route.
struct QAItem {
    std::string qa_id;
    std::string network_id;
    QType qtype = QType::global_count;
    std::string question_text;
    std::map<std::string, std::string> params;  // template slot -> value
    std::vector<std::string> options;           // local_count_1 only: exactly 4
    std::string answer_text;                    // letter A-D | integer | yes/no
    std::optional<transit::Route> answer_route;  // planning only
    transit::Difficulty map_difficulty = transit::Difficulty::easy;
    transit::Difficulty question_difficulty = transit::Difficulty::easy;
    int transfer_count = 0;  // planning: transfers of the oracle route; else 0
    Split split = Split::train;

    bool operator==(const QAItem&) const = default;
};

/// One JSON object per line, field names as in QAItem; routes serialized as
/// arrays of {line, from, to}. items_from_jsonl(items_to_jsonl(v)) == v.
std::string item_to_json_line(const QAItem& item);
QAItem item_from_json_line(const std::string& line);
std::string items_to_jsonl(const std::vector<QAItem>& items);
std::vector<QAItem> items_from_jsonl(const std::string& text);
void items_to_jsonl_file(const std::vector<QAItem>& items, const std::string& path);
std::vector<QAItem> items_from_jsonl_file(const std::string& path);

}  // namespace metrorl::qa
