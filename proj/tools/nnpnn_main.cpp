// Command-line entry point: train-inverse, train-compress, eval, gradcheck.
// Exit codes: 0 success, 1 check/abort failure, 2 usage or config error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nnpnn/config.hpp"
#include "nnpnn/gradcheck.hpp"
#include "nnpnn/run.hpp"

namespace fs = std::filesystem;
using nnpnn::Experiment;

namespace {

struct TrainArgs {
    std::string config_path;
    std::string out_dir = "run";
    std::string resume_ckpt;
    std::optional<uint64_t> seed;
    std::optional<long long> iters;
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration JSON");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--ckpt", args.resume_ckpt, "checkpoint to resume from");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--iters", args.iters, "override the iteration count");
}

nnpnn::RunConfig resolve_config(const TrainArgs& args, Experiment experiment) {
    nnpnn::RunConfig cfg = nnpnn::default_run_config(experiment);
    if (!args.config_path.empty()) {
        cfg = nnpnn::load_config_file(args.config_path, experiment);
    }
    if (args.seed) cfg.seed = *args.seed;
    if (args.iters) cfg.iterations = *args.iters;
    cfg.validate();
    return cfg;
}

void print_stats(const nnpnn::EvalStats& stats) {
    nnpnn::ordered_json j{{"mean", stats.mean},
                          {"median", stats.median},
                          {"frac_within_10", stats.frac_within_10},
                          {"frac_within_25", stats.frac_within_25},
                          {"trials", stats.trials}};
    std::cout << j.dump() << std::endl;
}

int cmd_train(const TrainArgs& args, Experiment experiment) {
    nnpnn::EvalStats stats;
    if (experiment == Experiment::Inverse) {
        nnpnn::InverseSession s =
            args.resume_ckpt.empty()
                ? nnpnn::make_inverse_session(resolve_config(args, experiment))
                : nnpnn::load_inverse_checkpoint(args.resume_ckpt);
        if (!args.resume_ckpt.empty() && args.iters) s.cfg.iterations = *args.iters;
        stats = nnpnn::run_inverse(s, args.out_dir);
    } else {
        nnpnn::CompressSession s =
            args.resume_ckpt.empty()
                ? nnpnn::make_compress_session(resolve_config(args, experiment))
                : nnpnn::load_compress_checkpoint(args.resume_ckpt);
        if (!args.resume_ckpt.empty() && args.iters) s.cfg.iterations = *args.iters;
        stats = nnpnn::run_compress(s, args.out_dir);
    }
    print_stats(stats);
    return 0;
}

int cmd_eval(const std::string& ckpt_path, long long trials, uint64_t seed) {
    if (trials < 1) throw nnpnn::ConfigError("eval: --trials must be >= 1");
    nnpnn::Rng rng(seed);
    nnpnn::EvalStats stats;
    if (nnpnn::peek_experiment(ckpt_path) == Experiment::Inverse) {
        nnpnn::InverseSession s = nnpnn::load_inverse_checkpoint(ckpt_path);
        stats = nnpnn::evaluate_inverse(s.host, s.params, s.cfg.target, rng, trials);
    } else {
        nnpnn::CompressSession s = nnpnn::load_compress_checkpoint(ckpt_path);
        stats = nnpnn::evaluate_compression(s.encoder, s.decoder, s.params, s.cfg.target,
                                            rng, trials);
    }
    print_stats(stats);
    return 0;
}

int cmd_gradcheck(uint64_t seed, int per_suite, bool inject_fault) {
    nnpnn::GradCheckReport report = nnpnn::run_gradcheck(seed, per_suite, inject_fault);
    for (const nnpnn::GradCheckSuite& s : report.suites) {
        std::printf("suite %-10s configs=%3d  max_rel_error=%.3e  worst: %s\n",
                    s.name.c_str(), s.configs, s.max_rel_error, s.worst_case.c_str());
    }
    std::printf("total configs=%d  threshold=%.1e  %s\n", report.total_configs(),
                report.threshold, report.passed() ? "PASS" : "FAIL");
    if (!report.passed()) {
        std::fprintf(stderr, "gradcheck: max relative error %.3e exceeds %.1e\n",
                     report.worst_error(), report.threshold);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"host networks that learn by querying a frozen target network"};
    app.require_subcommand(1);

    TrainArgs inv_args, cmp_args;
    CLI::App* train_inv = app.add_subcommand("train-inverse", "train the inverse host");
    add_train_options(train_inv, inv_args);
    CLI::App* train_cmp =
        app.add_subcommand("train-compress", "train the encoder/decoder pair");
    add_train_options(train_cmp, cmp_args);

    std::string eval_ckpt;
    long long eval_trials = 1000;
    uint64_t eval_seed = 7;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--trials", eval_trials, "number of fresh trials");
    eval_cmd->add_option("--seed", eval_seed, "evaluation stream seed");

    uint64_t gc_seed = 1;
    int gc_per_suite = 30;
    bool gc_inject = false;
    CLI::App* gc_cmd =
        app.add_subcommand("gradcheck", "finite-difference gradient sweeps");
    gc_cmd->add_option("--seed", gc_seed, "randomization seed");
    gc_cmd->add_option("--per-suite", gc_per_suite, "configurations per suite");
    gc_cmd->add_flag("--inject-fault", gc_inject,
                     "corrupt one gradient to exercise the failure path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train_inv->parsed()) return cmd_train(inv_args, Experiment::Inverse);
        if (train_cmp->parsed()) return cmd_train(cmp_args, Experiment::Compress);
        if (eval_cmd->parsed()) return cmd_eval(eval_ckpt, eval_trials, eval_seed);
        if (gc_cmd->parsed()) return cmd_gradcheck(gc_seed, gc_per_suite, gc_inject);
    } catch (const nnpnn::TrainAbortError& e) {
        std::fprintf(stderr, "error: %s (last good state in ckpt-abort.json)\n", e.what());
        return 1;
    } catch (const nnpnn::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const nnpnn::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
