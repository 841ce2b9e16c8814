#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dicholin/perturbation.hpp"
#include "dicholin/systems.hpp"

namespace dicholin {

struct QuerySpec {
    enum class Mode { List, Sampler };
    Mode mode = Mode::Sampler;
    std::vector<std::pair<long, Vec>> items; // List
    int count = 100;                         // Sampler
    double radius = 2.0;
    std::vector<long> times = {-3, -2, -1, 0, 1, 2, 3};
};

struct HolderBlock {
    double alpha = 0.5;
    std::vector<double> scales;
    int pairs = 8;
    long n = 0;
    std::optional<Vec> center; // origin when absent
};

/// Everything one run needs, parsed and validated from a JSON file. The exact
/// schema is documented in the README; unknown keys are rejected so typos
/// fail loudly instead of silently running defaults.
struct ExperimentConfig {
    // system block
    std::string generator; // dimension_exchange | weighted_shift | family_switch | explicit
    ShiftSpec shift;
    FamilySpec family;
    long ex_n_min = 0; // explicit systems
    std::vector<Matrix> ex_matrices;
    std::vector<Matrix> ex_projections;
    double ex_D = 1.0;
    double ex_lambda = 0.0;
    Norm p = Norm::Inf;

    PerturbationSequence f = PerturbationSequence::zero();

    double tail_tol = 1e-9;
    double iter_tol = 1e-10;
    long n0 = -20, n1 = 20;

    QuerySpec queries;
    std::optional<HolderBlock> holder;
    unsigned long long seed = 0;
};

/// Parse + validate. Throws ConfigError on missing file, malformed JSON,
/// schema violations, or values outside their domains.
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Build the configured linear system (generator or explicit), certifying it
/// on the config window. Throws VerificationFailure when the window check
/// fails and ConfigError on structural problems.
[[nodiscard]] GeneratedSystem build_system(const ExperimentConfig& cfg);

} // namespace dicholin
