#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rbeim/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string precision;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: config out_dir)");
    cmd->add_option("--precision", args.precision, "single|double|extended")
        ->check(CLI::IsMember({"single", "double", "extended"}));
    cmd->add_option("--seed", args.seed, "override the global seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

rbeim::ExperimentConfig make_config(const CommonArgs& args) {
    rbeim::ExperimentConfig cfg = rbeim::load_config(args.config_path);
    if (!args.precision.empty()) cfg.precision = rbeim::parse_precision(args.precision);
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    return cfg;
}

void ok(const std::string& out_dir) {
    nlohmann::json j{{"status", "ok"}, {"out_dir", out_dir}};
    std::cout << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rbx: certified reduced-basis error-bound experiments"};
    app.require_subcommand(1);

    CommonArgs run_args, diag_args, bench_args, perturb_args;
    CLI::App* run_cmd = app.add_subcommand("run", "greedy build + estimator sweep");
    add_common(run_cmd, run_args);

    CLI::App* diag_cmd = app.add_subcommand("eim-diag", "EIM offline diagnostics only");
    add_common(diag_cmd, diag_args);

    CLI::App* bench_cmd = app.add_subcommand("bench", "online cost benchmark across truth sizes");
    add_common(bench_cmd, bench_args);
    std::vector<int> n_values{200, 2000};
    int calls = 2000;
    bench_cmd->add_option("--n", n_values, "truth dimensions to compare");
    bench_cmd->add_option("--calls", calls, "timed calls per estimator");

    CLI::App* perturb_cmd = app.add_subcommand("perturb", "sweep with perturbed snapshots");
    add_common(perturb_cmd, perturb_args);
    double xi = -1.0;
    perturb_cmd->add_option("--xi", xi, "normalized residual of the perturbed snapshots");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            rbeim::ExperimentConfig cfg = make_config(run_args);
            rbeim::run_sweep(cfg, cfg.out_dir);
            ok(cfg.out_dir);
        } else if (diag_cmd->parsed()) {
            rbeim::ExperimentConfig cfg = make_config(diag_args);
            rbeim::run_eim_diag(cfg, cfg.out_dir);
            ok(cfg.out_dir);
        } else if (bench_cmd->parsed()) {
            rbeim::ExperimentConfig cfg = make_config(bench_args);
            rbeim::bench_online(cfg, n_values, cfg.out_dir, calls);
            ok(cfg.out_dir);
        } else if (perturb_cmd->parsed()) {
            rbeim::ExperimentConfig cfg = make_config(perturb_args);
            if (xi >= 0.0) cfg.xi = xi;
            rbeim::run_perturb(cfg, cfg.out_dir);
            ok(cfg.out_dir);
        }
    } catch (const std::exception& ex) {
        nlohmann::json j{{"status", "error"}, {"error", ex.what()}};
        std::cout << j.dump() << "\n";
        return 1;
    }
    return 0;
}
