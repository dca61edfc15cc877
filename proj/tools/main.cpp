#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "metrorl/cli_commands.hpp"

namespace cli = metrorl::cli;

namespace {

// Shared flags; --config is read eagerly so later per-command flags could
// override it if we ever add any.
struct Common {
    std::uint64_t seed = 0;
    std::string config_file;
    std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
    cmd->add_option("--seed", c.seed, "root seed; every random draw derives from it");
    cmd->add_option("--config", c.config_file, "JSON config file (reward/train/quota)")
        ->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", c.out_dir, "output directory (created if absent)");
    if (needs_out) out->required();
}

cli::Configs resolve_configs(const Common& c) {
    return c.config_file.empty() ? cli::Configs{} : cli::load_config_file(c.config_file);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transit-map question generation, reward scoring and GRPO curriculum "
                 "training at desk scale"};
    app.set_version_flag("--version", std::string(cli::kToolName) + " " + cli::kToolVersion);
    app.require_subcommand(1);

    Common genmap_common;
    cli::GenmapOptions genmap;
    auto* cmd_genmap = app.add_subcommand("genmap", "generate synthetic transit networks");
    add_common(cmd_genmap, genmap_common);
    cmd_genmap->add_option("--count", genmap.count, "number of networks");
    cmd_genmap->add_option("--prefix", genmap.prefix, "network id / filename prefix");
    cmd_genmap->add_option("--lines", genmap.spec.line_count, "lines per network");
    cmd_genmap->add_option("--stops-min", genmap.spec.stops_per_line_min, "min stops per line");
    cmd_genmap->add_option("--stops-max", genmap.spec.stops_per_line_max, "max stops per line");
    cmd_genmap->add_option("--density", genmap.spec.transfer_density,
                           "target fraction of multi-line stops");

    Common genqa_common;
    cli::GenqaOptions genqa;
    std::vector<std::string> holdout_ids;
    auto* cmd_genqa = app.add_subcommand("genqa", "generate a question dataset from networks");
    add_common(cmd_genqa, genqa_common);
    cmd_genqa->add_option("--networks", genqa.network_files, "network JSON files")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_genqa->add_option("--holdout", holdout_ids,
                          "network ids whose items form the test split")
        ->required();

    Common score_common;
    cli::ScoreOptions score;
    auto* cmd_score = app.add_subcommand("score", "score an answers file against a dataset");
    add_common(cmd_score, score_common);
    cmd_score->add_option("--dataset", score.dataset_file, "dataset JSONL")->required();
    cmd_score->add_option("--answers", score.answers_file,
                          "JSONL of {\"qa_id\":..., \"answer\":...}")
        ->required();
    cmd_score->add_option("--networks", score.network_files, "network JSON files")->required();

    Common train_common;
    cli::TrainCmdOptions train;
    auto* cmd_train = app.add_subcommand("train", "run a GRPO curriculum training simulation");
    add_common(cmd_train, train_common);
    cmd_train->add_option("--dataset", train.dataset_file, "training pool JSONL")->required();
    cmd_train->add_option("--networks", train.network_files, "network JSON files")->required();
    cmd_train->add_option("--eval-dataset", train.eval_dataset_file,
                          "held-out eval JSONL (default: the training pool)");
    cmd_train->add_option("--mode", train.mode, "baseline | rewardmap");
    cmd_train->add_option("--granularity", train.granularity, "fine | coarse | none");
    cmd_train->add_option("--epochs", train.epochs_per_stage, "epochs per curriculum stage");
    cmd_train->add_option("--eval-every", train.eval_every,
                          "evaluate every N steps (0 = final only)");

    Common curves_common;
    cli::CurvesOptions curves;
    auto* cmd_curves = app.add_subcommand("curves",
                                          "merge two training logs into one comparison table");
    add_common(cmd_curves, curves_common);
    cmd_curves->add_option("--log-a", curves.log_a_file, "first training_log.csv")->required();
    cmd_curves->add_option("--log-b", curves.log_b_file, "second training_log.csv")->required();
    cmd_curves->add_option("--label-a", curves.label_a, "column prefix for the first log");
    cmd_curves->add_option("--label-b", curves.label_b, "column prefix for the second log");

    std::string rerun_manifest;
    std::string rerun_out;
    auto* cmd_rerun = app.add_subcommand("rerun", "re-execute a command from its manifest");
    cmd_rerun->add_option("--manifest", rerun_manifest, "manifest.json of a previous run")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_rerun->add_option("--out", rerun_out,
                          "output directory (default: the manifest's directory)");

    CLI11_PARSE(app, argc, argv);

    return cli::run_guarded(
        [&]() -> int {
            if (cmd_genmap->parsed()) {
                genmap.seed = genmap_common.seed;
                genmap.out_dir = genmap_common.out_dir;
                genmap.configs = resolve_configs(genmap_common);
                return cli::cmd_genmap(genmap, std::cout);
            }
            if (cmd_genqa->parsed()) {
                genqa.seed = genqa_common.seed;
                genqa.out_dir = genqa_common.out_dir;
                genqa.configs = resolve_configs(genqa_common);
                genqa.holdout.insert(holdout_ids.begin(), holdout_ids.end());
                return cli::cmd_genqa(genqa, std::cout);
            }
            if (cmd_score->parsed()) {
                score.out_dir = score_common.out_dir;
                score.configs = resolve_configs(score_common);
                return cli::cmd_score(score, std::cout);
            }
            if (cmd_train->parsed()) {
                train.seed = train_common.seed;
                train.out_dir = train_common.out_dir;
                train.configs = resolve_configs(train_common);
                return cli::cmd_train(train, std::cout);
            }
            if (cmd_curves->parsed()) {
                curves.out_dir = curves_common.out_dir;
                return cli::cmd_curves(curves, std::cout);
            }
            return cli::cmd_rerun(rerun_manifest, rerun_out, std::cout);
        },
        std::cerr);
}
