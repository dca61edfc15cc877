#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "metrorl/grpo.hpp"
#include "metrorl/qa_generator.hpp"
#include "metrorl/reward_engine.hpp"
#include "metrorl/transit_graph.hpp"

namespace metrorl::cli {

extern const char* kToolName;     // "metrorl"
extern const char* kToolVersion;  // semantic version of the CLI/library

/// Everything a run can be configured with, resolved to concrete values.
/// The config file is a JSON document with optional "reward", "train" and
/// "quota" objects whose fields mirror these structs; absent fields keep
/// their defaults. Unknown keys are rejected (they are always typos).
struct Configs {
    reward::RewardConfig reward;
    grpo::TrainConfig train;
    qa::Quota quota = default_quota();

    static qa::Quota default_quota();

    bool operator==(const Configs&) const = default;
};

Configs load_config_file(const std::string& path);
Configs configs_from_json_text(const std::string& text);
std::string configs_to_json_text(const Configs& cfg);

struct GenmapOptions {
    int count = 3;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string prefix = "net";  // network ids and filenames are prefix + index
    transit::SyntheticSpec spec;  // network_id field is ignored; prefix wins
    Configs configs;
};

struct GenqaOptions {
    std::vector<std::string> network_files;
    std::set<std::string> holdout;  // network ids whose items form the test split
    std::uint64_t seed = 0;
    std::string out_dir;
    Configs configs;
};

struct ScoreOptions {
    std::string dataset_file;
    std::string answers_file;  // JSONL of {"qa_id": ..., "answer": raw text}
    std::vector<std::string> network_files;
    std::string out_dir;
    Configs configs;
};

struct TrainCmdOptions {
    std::string dataset_file;
    std::vector<std::string> network_files;
    std::string eval_dataset_file;  // empty: evaluate on the training pool
    std::string mode = "rewardmap";
    std::string granularity = "fine";
    std::uint64_t seed = 0;
    int epochs_per_stage = 1;
    int eval_every = 0;
    std::string out_dir;
    Configs configs;
};

struct CurvesOptions {
    std::string log_a_file;
    std::string log_b_file;
    std::string label_a = "a";
    std::string label_b = "b";
    std::string out_dir;
};

/// Each command writes its artifacts plus exactly one manifest.json into
/// out_dir, prints a short status line to `out`, and returns a process exit
/// code (0 = success). Errors raise the library exception types; `run guards`
/// in the binary translate them to messages on stderr and a nonzero exit.
/// Manifests never mention the output directory, so re-running one into a
/// fresh directory reproduces every file byte for byte.
int cmd_genmap(const GenmapOptions& opts, std::ostream& out);
int cmd_genqa(const GenqaOptions& opts, std::ostream& out);
int cmd_score(const ScoreOptions& opts, std::ostream& out);
int cmd_train(const TrainCmdOptions& opts, std::ostream& out);
int cmd_curves(const CurvesOptions& opts, std::ostream& out);

/// Re-executes the command recorded in a manifest. The config snapshot in the
/// manifest is authoritative; the original config file is not consulted.
/// Writes into out_dir, or the manifest's own directory when out_dir is "".
int cmd_rerun(const std::string& manifest_file, const std::string& out_dir, std::ostream& out);

/// Runs fn(), translating library errors into "error: ..." on `err` and a
/// nonzero exit code. Used by the binary and handy in tests.
int run_guarded(const std::function<int()>& fn, std::ostream& err);

}  // namespace metrorl::cli
