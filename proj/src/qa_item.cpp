#include "metrorl/qa_item.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "metrorl/errors.hpp"

using nlohmann::json;

namespace metrorl::qa {

std::string to_string(QType t) {
    switch (t) {
        case QType::local_count_1: return "local_count_1";
        case QType::local_count_2: return "local_count_2";
        case QType::global_count: return "global_count";
        case QType::torf_1: return "torf_1";
        case QType::torf_2: return "torf_2";
        case QType::planning: return "planning";
    }
    throw UsageError("invalid qtype value");
}

QType qtype_from_string(const std::string& s) {
    if (s == "local_count_1") return QType::local_count_1;
    if (s == "local_count_2") return QType::local_count_2;
    if (s == "global_count") return QType::global_count;
    if (s == "torf_1") return QType::torf_1;
    if (s == "torf_2") return QType::torf_2;
    if (s == "planning") return QType::planning;
    throw ParseError("unknown qtype \"" + s + "\"");
}

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ParseError("unknown split \"" + s + "\" (expected train|test)");
}

std::string item_to_json_line(const QAItem& item) {
    json j;
    j["qa_id"] = item.qa_id;
    j["network_id"] = item.network_id;
    j["qtype"] = to_string(item.qtype);
    j["question_text"] = item.question_text;
    j["params"] = item.params;
    if (!item.options.empty()) {
        j["options"] = item.options;
    }
    if (item.answer_route) {
        json arr = json::array();
        for (const auto& seg : item.answer_route->segments) {
            arr.push_back({{"line", seg.line}, {"from", seg.from}, {"to", seg.to}});
        }
        j["answer"] = std::move(arr);
    } else {
        j["answer"] = item.answer_text;
    }
    j["map_difficulty"] = transit::to_string(item.map_difficulty);
    j["question_difficulty"] = transit::to_string(item.question_difficulty);
    j["transfer_count"] = item.transfer_count;
    j["split"] = to_string(item.split);
    return j.dump();
}

QAItem item_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("qa record: ") + e.what());
    }
    QAItem item;
    try {
        item.qa_id = j.at("qa_id").get<std::string>();
        item.network_id = j.at("network_id").get<std::string>();
        item.qtype = qtype_from_string(j.at("qtype").get<std::string>());
        item.question_text = j.at("question_text").get<std::string>();
        item.params = j.at("params").get<std::map<std::string, std::string>>();
        if (j.contains("options")) {
            item.options = j.at("options").get<std::vector<std::string>>();
        }
        const json& ans = j.at("answer");
        if (ans.is_array()) {
            transit::Route route;
            for (const auto& seg : ans) {
                route.segments.push_back({seg.at("line").get<std::string>(),
                                          seg.at("from").get<std::string>(),
                                          seg.at("to").get<std::string>()});
            }
            item.answer_route = std::move(route);
        } else {
            item.answer_text = ans.get<std::string>();
        }
        item.map_difficulty =
            transit::difficulty_from_string(j.at("map_difficulty").get<std::string>());
        item.question_difficulty =
            transit::difficulty_from_string(j.at("question_difficulty").get<std::string>());
        item.transfer_count = j.at("transfer_count").get<int>();
        item.split = split_from_string(j.at("split").get<std::string>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("qa record: ") + e.what());
    }
    return item;
}

std::string items_to_jsonl(const std::vector<QAItem>& items) {
    std::string out;
    for (const auto& item : items) {
        out += item_to_json_line(item);
        out += '\n';
    }
    return out;
}

std::vector<QAItem> items_from_jsonl(const std::string& text) {
    std::vector<QAItem> out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out.push_back(item_from_json_line(line));
    }
    return out;
}

void items_to_jsonl_file(const std::vector<QAItem>& items, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write dataset file: " + path);
    }
    out << items_to_jsonl(items);
}

std::vector<QAItem> items_from_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open dataset file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return items_from_jsonl(buf.str());
}

}  // namespace metrorl::qa
