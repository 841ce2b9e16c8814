#pragma once

#include <string>

#include "dicholin/config.hpp"
#include "dicholin/report.hpp"

namespace dicholin {

/// Exit-code contract: 0 all enabled checks pass, 2 some check failed.
/// Config/usage problems are not handled here; they throw (ConfigError,
/// ShapeError) and the CLI maps them to exit 1.
struct RunOutcome {
    int exit_code = 0;
    RunReport report;
};

/// command is one of verify | solve | holder | all. Writes report.json and
/// timings.txt into out_dir, plus residuals.csv (solve/all) and holder.csv
/// (holder/all with a holder block). Honors DICHOLIN_THREADS (0 or unset =
/// hardware concurrency) for query evaluation; results are byte-identical
/// for any thread count.
[[nodiscard]] RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& command,
                                        const std::string& out_dir);

} // namespace dicholin
