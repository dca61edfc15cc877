#include "metrorl/cli_commands.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "metrorl/answer_format.hpp"
#include "metrorl/curriculum.hpp"
#include "metrorl/errors.hpp"
#include "metrorl/qa_item.hpp"
#include "metrorl/rng.hpp"

namespace metrorl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kToolName = "metrorl";
const char* kToolVersion = "0.1.0";

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
    if (!out) throw Error("write failed: " + path);
}

std::string prepare_out_dir(const std::string& dir) {
    if (dir.empty()) throw UsageError("--out directory is required");
    fs::create_directories(dir);
    return dir;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool known = false;
        for (const char* k : allowed) known = known || key == k;
        if (!known) throw ParseError("unknown key \"" + key + "\" in " + where);
    }
}

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ParseError(std::string("config field ") + key +
                                                 " must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ParseError(std::string("config field ") + key +
                                                         " must be an integer");
    return j.at(key).get<int>();
}

Configs configs_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    check_keys(j, "config", {"reward", "train", "quota"});
    Configs cfg;
    if (j.contains("reward")) {
        const auto& r = j.at("reward");
        check_keys(r, "config.reward",
                   {"alpha", "gamma_easy", "gamma_medium", "gamma_hard", "beta_0", "beta_1",
                    "detail_cap"});
        cfg.reward.alpha = get_num(r, "alpha", cfg.reward.alpha);
        cfg.reward.gamma_easy = get_num(r, "gamma_easy", cfg.reward.gamma_easy);
        cfg.reward.gamma_medium = get_num(r, "gamma_medium", cfg.reward.gamma_medium);
        cfg.reward.gamma_hard = get_num(r, "gamma_hard", cfg.reward.gamma_hard);
        cfg.reward.beta_0 = get_num(r, "beta_0", cfg.reward.beta_0);
        cfg.reward.beta_1 = get_num(r, "beta_1", cfg.reward.beta_1);
        cfg.reward.detail_cap = get_num(r, "detail_cap", cfg.reward.detail_cap);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t, "config.train",
                   {"k", "learning_rate", "kl_coeff", "batch_queries", "max_segments"});
        cfg.train.k = get_int(t, "k", cfg.train.k);
        cfg.train.learning_rate = get_num(t, "learning_rate", cfg.train.learning_rate);
        cfg.train.kl_coeff = get_num(t, "kl_coeff", cfg.train.kl_coeff);
        cfg.train.batch_queries = get_int(t, "batch_queries", cfg.train.batch_queries);
        cfg.train.max_segments = get_int(t, "max_segments", cfg.train.max_segments);
    }
    if (j.contains("quota")) {
        const auto& q = j.at("quota");
        check_keys(q, "config.quota",
                   {"local_count_1", "local_count_2", "global_count", "torf_1", "torf_2",
                    "planning"});
        cfg.quota.local_count_1 = get_int(q, "local_count_1", cfg.quota.local_count_1);
        cfg.quota.local_count_2 = get_int(q, "local_count_2", cfg.quota.local_count_2);
        cfg.quota.global_count = get_int(q, "global_count", cfg.quota.global_count);
        cfg.quota.torf_1 = get_int(q, "torf_1", cfg.quota.torf_1);
        cfg.quota.torf_2 = get_int(q, "torf_2", cfg.quota.torf_2);
        cfg.quota.planning = get_int(q, "planning", cfg.quota.planning);
    }
    reward::validate(cfg.reward);
    for (int q : {cfg.quota.local_count_1, cfg.quota.local_count_2, cfg.quota.global_count,
                  cfg.quota.torf_1, cfg.quota.torf_2, cfg.quota.planning}) {
        if (q < 0) throw ValidationError("quotas must be >= 0");
    }
    return cfg;
}

json configs_to_json(const Configs& cfg) {
    return json{
        {"reward",
         {{"alpha", cfg.reward.alpha},
          {"gamma_easy", cfg.reward.gamma_easy},
          {"gamma_medium", cfg.reward.gamma_medium},
          {"gamma_hard", cfg.reward.gamma_hard},
          {"beta_0", cfg.reward.beta_0},
          {"beta_1", cfg.reward.beta_1},
          {"detail_cap", cfg.reward.detail_cap}}},
        {"train",
         {{"k", cfg.train.k},
          {"learning_rate", cfg.train.learning_rate},
          {"kl_coeff", cfg.train.kl_coeff},
          {"batch_queries", cfg.train.batch_queries},
          {"max_segments", cfg.train.max_segments}}},
        {"quota",
         {{"local_count_1", cfg.quota.local_count_1},
          {"local_count_2", cfg.quota.local_count_2},
          {"global_count", cfg.quota.global_count},
          {"torf_1", cfg.quota.torf_1},
          {"torf_2", cfg.quota.torf_2},
          {"planning", cfg.quota.planning}}}};
}

// The manifest deliberately never mentions the output directory: rerunning it
// into any directory must reproduce the same bytes, manifest included.
void write_manifest(const std::string& out_dir, const std::string& command, std::uint64_t seed,
                    const Configs& configs, const json& options, const json& inputs,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::string>& substitute_metrics) {
    json m{{"tool", kToolName},
           {"version", kToolVersion},
           {"command", command},
           {"seed", seed},
           {"config", configs_to_json(configs)},
           {"options", options},
           {"inputs", inputs},
           {"outputs", outputs},
           {"substitute_metrics", substitute_metrics}};
    write_text_file(join_path(out_dir, "manifest.json"), m.dump(2) + "\n");
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::map<std::string, transit::TransitNetwork> load_networks(
    const std::vector<std::string>& files) {
    if (files.empty()) throw UsageError("at least one network file is required");
    std::map<std::string, transit::TransitNetwork> nets;
    for (const auto& file : files) {
        auto net = transit::load_network_file(file);
        if (nets.count(net.network_id)) {
            throw UsageError("duplicate network id across files: " + net.network_id);
        }
        nets[net.network_id] = std::move(net);
    }
    return nets;
}

answer::ParsedAnswer parse_for(const qa::QAItem& item, const std::string& text) {
    return item.qtype == qa::QType::planning ? answer::parse_route(text)
                                             : answer::parse_boxed(text);
}

std::string difficulty_key(transit::Difficulty d) { return transit::to_string(d); }

}  // namespace

qa::Quota Configs::default_quota() {
    qa::Quota q;
    q.local_count_1 = 3;
    q.local_count_2 = 3;
    q.global_count = 1;
    q.torf_1 = 4;
    q.torf_2 = 4;
    q.planning = 6;
    return q;
}

Configs load_config_file(const std::string& path) {
    return configs_from_json_text(read_text_file(path));
}

Configs configs_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return configs_from_json(j);
}

std::string configs_to_json_text(const Configs& cfg) {
    return configs_to_json(cfg).dump(2) + "\n";
}

int cmd_genmap(const GenmapOptions& opts, std::ostream& out) {
    if (opts.count < 1) throw UsageError("--count must be >= 1");
    if (opts.prefix.empty()) throw UsageError("--prefix must be non-empty");
    if (opts.spec.line_count < 1) throw UsageError("--lines must be >= 1");
    if (opts.spec.stops_per_line_min < 2) throw UsageError("--stops-min must be >= 2");
    if (opts.spec.stops_per_line_max < opts.spec.stops_per_line_min) {
        throw UsageError("--stops-max must be >= --stops-min");
    }
    if (opts.spec.transfer_density < 0.0 || opts.spec.transfer_density > 1.0) {
        throw UsageError("--density must lie in [0, 1]");
    }
    const auto dir = prepare_out_dir(opts.out_dir);
    std::vector<std::string> outputs;
    for (int i = 0; i < opts.count; ++i) {
        auto spec = opts.spec;
        spec.network_id = opts.prefix + std::to_string(i);
        auto net = transit::generate_synthetic_network(
            derive_seed(opts.seed, "genmap", static_cast<std::uint64_t>(i)), spec);
        const auto name = spec.network_id + ".json";
        transit::save_network_file(net, join_path(dir, name));
        outputs.push_back(name);
    }
    write_manifest(dir, "genmap", opts.seed, opts.configs,
                   json{{"count", opts.count},
                        {"prefix", opts.prefix},
                        {"line_count", opts.spec.line_count},
                        {"stops_per_line_min", opts.spec.stops_per_line_min},
                        {"stops_per_line_max", opts.spec.stops_per_line_max},
                        {"transfer_density", opts.spec.transfer_density},
                        {"easy_max_lines", opts.spec.easy_max_lines},
                        {"medium_max_lines", opts.spec.medium_max_lines}},
                   json::object(), outputs, {});
    out << "genmap: wrote " << opts.count << " networks\n";
    return 0;
}

int cmd_genqa(const GenqaOptions& opts, std::ostream& out) {
    if (opts.holdout.empty()) {
        throw UsageError("--holdout must name at least one network id for the test split");
    }
    auto nets = load_networks(opts.network_files);
    std::vector<qa::QAItem> items;
    for (const auto& [id, net] : nets) {
        auto batch = qa::generate(net, derive_seed(opts.seed, "genqa", id), opts.configs.quota);
        items.insert(items.end(), batch.begin(), batch.end());
    }
    items = qa::balance_yes_no(items, nets, derive_seed(opts.seed, "balance"));
    auto [train_items, test_items] = qa::split_dataset(items, opts.holdout);

    const auto dir = prepare_out_dir(opts.out_dir);
    qa::items_to_jsonl_file(train_items, join_path(dir, "train.jsonl"));
    qa::items_to_jsonl_file(test_items, join_path(dir, "test.jsonl"));

    json yes_no = json::object();
    json per_type = json::object();
    json map_hist{{"easy", 0}, {"medium", 0}, {"hard", 0}};
    json question_hist{{"easy", 0}, {"medium", 0}, {"hard", 0}};
    for (qa::QType t :
         {qa::QType::local_count_1, qa::QType::local_count_2, qa::QType::global_count,
          qa::QType::torf_1, qa::QType::torf_2, qa::QType::planning}) {
        per_type[qa::to_string(t)] = 0;
    }
    for (qa::QType t : {qa::QType::torf_1, qa::QType::torf_2}) {
        yes_no[qa::to_string(t)] = json{{"yes", 0}, {"no", 0}};
    }
    for (const auto& item : items) {
        per_type[qa::to_string(item.qtype)] = per_type[qa::to_string(item.qtype)].get<int>() + 1;
        map_hist[difficulty_key(item.map_difficulty)] =
            map_hist[difficulty_key(item.map_difficulty)].get<int>() + 1;
        question_hist[difficulty_key(item.question_difficulty)] =
            question_hist[difficulty_key(item.question_difficulty)].get<int>() + 1;
        if (item.qtype == qa::QType::torf_1 || item.qtype == qa::QType::torf_2) {
            auto& cell = yes_no[qa::to_string(item.qtype)][item.answer_text];
            cell = cell.get<int>() + 1;
        }
    }
    json report{{"item_count", items.size()},
                {"train_count", train_items.size()},
                {"test_count", test_items.size()},
                {"network_count", nets.size()},
                {"per_type", per_type},
                {"yes_no", yes_no},
                {"map_difficulty", map_hist},
                {"question_difficulty", question_hist}};
    write_text_file(join_path(dir, "balance_report.json"), report.dump(2) + "\n");

    write_manifest(dir, "genqa", opts.seed, opts.configs,
                   json{{"holdout", std::vector<std::string>(opts.holdout.begin(),
                                                             opts.holdout.end())}},
                   json{{"networks", opts.network_files}},
                   {"train.jsonl", "test.jsonl", "balance_report.json"}, {});
    out << "genqa: " << train_items.size() << " train / " << test_items.size()
        << " test items\n";
    return 0;
}

int cmd_score(const ScoreOptions& opts, std::ostream& out) {
    auto items = qa::items_from_jsonl_file(opts.dataset_file);
    std::map<std::string, qa::QAItem> by_id;
    for (const auto& item : items) {
        if (!by_id.emplace(item.qa_id, item).second) {
            throw UsageError("duplicate qa_id in dataset: " + item.qa_id);
        }
    }
    auto nets = load_networks(opts.network_files);

    const auto answers_text = read_text_file(opts.answers_file);
    struct AnswerRow {
        std::string qa_id;
        std::string answer;
    };
    std::vector<AnswerRow> rows;
    std::istringstream in(answers_text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("answers line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("qa_id") || !j.contains("answer") ||
            !j.at("qa_id").is_string() || !j.at("answer").is_string()) {
            throw ParseError("answers line " + std::to_string(line_no) +
                             ": expected {\"qa_id\": str, \"answer\": str}");
        }
        check_keys(j, "answers line " + std::to_string(line_no), {"qa_id", "answer"});
        rows.push_back({j.at("qa_id").get<std::string>(), j.at("answer").get<std::string>()});
    }
    if (rows.empty()) throw UsageError("answers file has no records: " + opts.answers_file);

    std::ostringstream scores;
    std::set<std::string> seen;
    std::vector<std::pair<qa::QAItem, bool>> acc_results;
    std::vector<std::pair<qa::QAItem, double>> map_results;
    double total_sum = 0.0;
    int error_count = 0;
    for (const auto& row : rows) {
        auto record = [&](const json& j) { scores << j.dump() << "\n"; };
        auto it = by_id.find(row.qa_id);
        if (it == by_id.end()) {
            record(json{{"qa_id", row.qa_id}, {"error", "unknown qa_id"}});
            ++error_count;
            continue;
        }
        if (!seen.insert(row.qa_id).second) {
            record(json{{"qa_id", row.qa_id}, {"error", "duplicate answer for qa_id"}});
            ++error_count;
            continue;
        }
        const auto& item = it->second;
        auto net_it = nets.find(item.network_id);
        if (net_it == nets.end()) {
            record(json{{"qa_id", row.qa_id},
                        {"error", "network not provided: " + item.network_id}});
            ++error_count;
            continue;
        }
        auto parsed = parse_for(item, row.answer);
        auto b = reward::score_item(item, parsed, net_it->second, opts.configs.reward);
        record(json{{"qa_id", item.qa_id},
                    {"qtype", qa::to_string(item.qtype)},
                    {"r_format", b.r_format},
                    {"r_correct", b.r_correct},
                    {"r_detail", b.r_detail},
                    {"w_map", b.w_map},
                    {"w_question", b.w_question},
                    {"w_difficulty", b.w_difficulty},
                    {"total", b.total}});
        acc_results.emplace_back(item, b.r_correct > 0.0);
        map_results.emplace_back(item, b.total);
        total_sum += b.total;
    }

    const auto dir = prepare_out_dir(opts.out_dir);
    write_text_file(join_path(dir, "scores.jsonl"), scores.str());
    json summary{{"scored", acc_results.size()},
                 {"errors", error_count},
                 {"unanswered", items.size() - seen.size()},
                 {"mean_total",
                  acc_results.empty() ? 0.0 : total_sum / static_cast<double>(acc_results.size())},
                 {"weighted_accuracy",
                  acc_results.empty() ? 0.0
                                      : reward::weighted_accuracy(acc_results,
                                                                  reward::EvalWeights{})},
                 {"weighted_map_score",
                  map_results.empty() ? 0.0
                                      : reward::weighted_map_score(map_results,
                                                                   reward::EvalWeights{})}};
    write_text_file(join_path(dir, "summary.json"), summary.dump(2) + "\n");
    write_manifest(dir, "score", /*seed=*/0, opts.configs, json::object(),
                   json{{"dataset", opts.dataset_file},
                        {"answers", opts.answers_file},
                        {"networks", opts.network_files}},
                   {"scores.jsonl", "summary.json"}, {});
    out << "score: " << acc_results.size() << " scored, " << error_count << " errors\n";
    return error_count == 0 ? 0 : 1;
}

int cmd_train(const TrainCmdOptions& opts, std::ostream& out) {
    if (opts.epochs_per_stage < 1) throw UsageError("--epochs must be >= 1");
    if (opts.eval_every < 0) throw UsageError("--eval-every must be >= 0");
    auto pool = qa::items_from_jsonl_file(opts.dataset_file);
    auto nets = load_networks(opts.network_files);
    auto eval_items = opts.eval_dataset_file.empty()
                          ? pool
                          : qa::items_from_jsonl_file(opts.eval_dataset_file);
    const auto mode = grpo::train_mode_from_string(opts.mode);
    const auto granularity = curriculum::granularity_from_string(opts.granularity);
    auto plan = curriculum::build_plan(pool, granularity, derive_seed(opts.seed, "plan"));

    auto cfg = opts.configs.train;
    cfg.seed = opts.seed;
    grpo::TrainOptions run;
    run.epochs_per_stage = opts.epochs_per_stage;
    run.eval_every = opts.eval_every;
    run.eval_items = eval_items;
    auto result = grpo::train(pool, plan, nets, cfg, opts.configs.reward, mode, run);
    auto final_metrics = grpo::evaluate(result.policy, eval_items, nets, opts.configs.reward,
                                        cfg, derive_seed(opts.seed, "final-eval"));

    const auto dir = prepare_out_dir(opts.out_dir);
    write_text_file(join_path(dir, "training_log.csv"), grpo::log_to_csv(result.log));
    json params = json::object();
    for (const auto& [key, value] : result.policy.parameters) params[key] = value;
    json policy{{"feature_extractor", result.policy.feature_extractor},
                {"parameters", params}};
    write_text_file(join_path(dir, "policy.json"), policy.dump(2) + "\n");
    json metrics{{"weighted_accuracy", final_metrics.weighted_accuracy},
                 {"weighted_map_score", final_metrics.weighted_map_score},
                 {"planning_validity", final_metrics.planning_validity},
                 {"item_count", final_metrics.item_count},
                 {"planning_count", final_metrics.planning_count}};
    write_text_file(join_path(dir, "metrics.json"), metrics.dump(2) + "\n");
    write_text_file(join_path(dir, "curriculum.json"),
                    curriculum::plan_manifest_json(plan, opts.epochs_per_stage));

    // The toy-policy evaluation numbers stand in for full-scale MLLM
    // benchmark metrics; the manifest flags them so downstream readers never
    // mistake one for the other.
    write_manifest(dir, "train", opts.seed, opts.configs,
                   json{{"mode", opts.mode},
                        {"granularity", opts.granularity},
                        {"epochs_per_stage", opts.epochs_per_stage},
                        {"eval_every", opts.eval_every}},
                   json{{"dataset", opts.dataset_file},
                        {"networks", opts.network_files},
                        {"eval_dataset", opts.eval_dataset_file.empty()
                                             ? json()
                                             : json(opts.eval_dataset_file)}},
                   {"training_log.csv", "policy.json", "metrics.json", "curriculum.json"},
                   {"weighted_accuracy", "weighted_map_score", "planning_validity",
                    "eval_weighted_accuracy", "eval_planning_validity"});
    out << "train: " << result.log.rows.size() << " steps, final weighted accuracy "
        << final_metrics.weighted_accuracy << "\n";
    return 0;
}

int cmd_curves(const CurvesOptions& opts, std::ostream& out) {
    auto label_ok = [](const std::string& s) {
        if (s.empty()) return false;
        for (char c : s) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
                return false;
            }
        }
        return true;
    };
    if (!label_ok(opts.label_a) || !label_ok(opts.label_b)) {
        throw UsageError("labels must be non-empty and use only [A-Za-z0-9_-]");
    }
    if (opts.label_a == opts.label_b) throw UsageError("labels must differ");
    auto log_a = grpo::log_from_csv(read_text_file(opts.log_a_file));
    auto log_b = grpo::log_from_csv(read_text_file(opts.log_b_file));
    if (log_a.rows.size() != log_b.rows.size()) {
        throw DomainError("step grids differ: " + std::to_string(log_a.rows.size()) + " vs " +
                          std::to_string(log_b.rows.size()) + " rows");
    }
    for (std::size_t i = 0; i < log_a.rows.size(); ++i) {
        if (log_a.rows[i].step != log_b.rows[i].step) {
            throw DomainError("step grids differ at row " + std::to_string(i + 1) + ": " +
                              std::to_string(log_a.rows[i].step) + " vs " +
                              std::to_string(log_b.rows[i].step));
        }
    }

    std::ostringstream csv;
    auto cols = [&](const std::string& label) {
        for (const char* name : {"stage_id", "mean_reward", "zero_reward_group_fraction",
                                 "mean_abs_advantage", "kl", "eval_weighted_accuracy",
                                 "eval_planning_validity"}) {
            csv << "," << label << "_" << name;
        }
    };
    csv << "step";
    cols(opts.label_a);
    cols(opts.label_b);
    csv << "\n";
    auto row_cells = [&](const grpo::StepRow& r) {
        csv << "," << r.stage_id << "," << fmt_double(r.mean_reward) << ","
            << fmt_double(r.zero_reward_group_fraction) << ","
            << fmt_double(r.mean_abs_advantage) << "," << fmt_double(r.kl) << ",";
        if (r.eval_weighted_accuracy) csv << fmt_double(*r.eval_weighted_accuracy);
        csv << ",";
        if (r.eval_planning_validity) csv << fmt_double(*r.eval_planning_validity);
    };
    for (std::size_t i = 0; i < log_a.rows.size(); ++i) {
        csv << log_a.rows[i].step;
        row_cells(log_a.rows[i]);
        row_cells(log_b.rows[i]);
        csv << "\n";
    }

    const auto dir = prepare_out_dir(opts.out_dir);
    write_text_file(join_path(dir, "curves.csv"), csv.str());
    write_manifest(dir, "curves", /*seed=*/0, Configs{},
                   json{{"label_a", opts.label_a}, {"label_b", opts.label_b}},
                   json{{"log_a", opts.log_a_file}, {"log_b", opts.log_b_file}},
                   {"curves.csv"}, {});
    out << "curves: merged " << log_a.rows.size() << " steps\n";
    return 0;
}

int cmd_rerun(const std::string& manifest_file, const std::string& out_dir, std::ostream& out) {
    json m;
    try {
        m = json::parse(read_text_file(manifest_file));
    } catch (const json::parse_error& e) {
        throw ParseError("manifest: " + std::string(e.what()));
    }
    if (!m.is_object() || m.value("tool", "") != kToolName) {
        throw ParseError("not a " + std::string(kToolName) + " manifest: " + manifest_file);
    }
    const std::string command = m.value("command", "");
    const auto dir = out_dir.empty()
                         ? fs::path(manifest_file).parent_path().string()
                         : out_dir;
    const auto target = dir.empty() ? std::string(".") : dir;
    const auto configs = configs_from_json(m.at("config"));
    const auto seed = m.at("seed").get<std::uint64_t>();
    const json& options = m.at("options");
    const json& inputs = m.at("inputs");

    if (command == "genmap") {
        GenmapOptions o;
        o.count = options.at("count").get<int>();
        o.seed = seed;
        o.out_dir = target;
        o.prefix = options.at("prefix").get<std::string>();
        o.spec.line_count = options.at("line_count").get<int>();
        o.spec.stops_per_line_min = options.at("stops_per_line_min").get<int>();
        o.spec.stops_per_line_max = options.at("stops_per_line_max").get<int>();
        o.spec.transfer_density = options.at("transfer_density").get<double>();
        o.spec.easy_max_lines = options.at("easy_max_lines").get<int>();
        o.spec.medium_max_lines = options.at("medium_max_lines").get<int>();
        o.configs = configs;
        return cmd_genmap(o, out);
    }
    if (command == "genqa") {
        GenqaOptions o;
        o.network_files = inputs.at("networks").get<std::vector<std::string>>();
        for (const auto& id : options.at("holdout")) o.holdout.insert(id.get<std::string>());
        o.seed = seed;
        o.out_dir = target;
        o.configs = configs;
        return cmd_genqa(o, out);
    }
    if (command == "score") {
        ScoreOptions o;
        o.dataset_file = inputs.at("dataset").get<std::string>();
        o.answers_file = inputs.at("answers").get<std::string>();
        o.network_files = inputs.at("networks").get<std::vector<std::string>>();
        o.out_dir = target;
        o.configs = configs;
        return cmd_score(o, out);
    }
    if (command == "train") {
        TrainCmdOptions o;
        o.dataset_file = inputs.at("dataset").get<std::string>();
        o.network_files = inputs.at("networks").get<std::vector<std::string>>();
        if (!inputs.at("eval_dataset").is_null()) {
            o.eval_dataset_file = inputs.at("eval_dataset").get<std::string>();
        }
        o.mode = options.at("mode").get<std::string>();
        o.granularity = options.at("granularity").get<std::string>();
        o.seed = seed;
        o.epochs_per_stage = options.at("epochs_per_stage").get<int>();
        o.eval_every = options.at("eval_every").get<int>();
        o.out_dir = target;
        o.configs = configs;
        return cmd_train(o, out);
    }
    if (command == "curves") {
        CurvesOptions o;
        o.log_a_file = inputs.at("log_a").get<std::string>();
        o.log_b_file = inputs.at("log_b").get<std::string>();
        o.label_a = options.at("label_a").get<std::string>();
        o.label_b = options.at("label_b").get<std::string>();
        o.out_dir = target;
        return cmd_curves(o, out);
    }
    throw ParseError("unknown command in manifest: \"" + command + "\"");
}

int run_guarded(const std::function<int()>& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace metrorl::cli
