#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dicholin/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dicholin: dichotomy verification and conjugacy construction"};
    app.get_formatter()->column_width(30);

    std::string command, config_path, out_dir = "out";
    long long seed = -1;
    app.add_option("command", command, "verify | solve | holder | all")->required();
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (default: ./out)");
    app.add_option("--seed", seed, "override the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage problems are exit 1 by contract
    }

    try {
        dicholin::ExperimentConfig cfg = dicholin::load_config(config_path);
        if (seed >= 0) cfg.seed = static_cast<unsigned long long>(seed);
        dicholin::RunOutcome outcome = dicholin::run_experiment(cfg, command, out_dir);
        std::fputs(dicholin::render_summary(outcome.report).c_str(), stdout);
        return outcome.exit_code;
    } catch (const dicholin::Error& e) {
        // Everything thrown before checks start is a config/usage problem.
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}
