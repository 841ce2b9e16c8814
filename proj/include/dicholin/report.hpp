#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dicholin/holder.hpp"

namespace dicholin {

struct QueryRow {
    long n = 0;
    int x_id = 0;
    double conj = 0.0;
    double inv1 = 0.0, inv2 = 0.0;
    std::optional<double> range_dist;
    double err_bound = 0.0;    // h-solver guarantee for this run
    double hbar_err = 0.0;     // worst inverse-correction bound this row used
    double picard_ratio = 0.0; // max consecutive sup-change ratio after sweep 1
};

/// Everything one run reports. Timing is deliberately absent: report.json is
/// byte-compared across runs, so wall-clock numbers live in timings.txt.
struct RunReport {
    std::string command;
    unsigned long long seed = 0;
    Norm p = Norm::Inf;
    std::string generator;

    // certificate summary
    bool cert_passed = false;
    double D = 1.0, lambda = 0.0, rho = 0.0, alpha0 = 0.0;
    double projection_bound = 0.0;
    bool split_ok = false, nest_ok = false, stable_ok = false, unstable_ok = false;
    long n0 = 0, n1 = 0;

    // contraction gate
    double c = 0.0, M = 0.0;
    double q = 0.0, c_star = 0.0;
    bool smallness_pass = false;

    // solve phase
    bool solved = false;
    int depth = 0;
    double err_bound = 0.0;
    double conj_bound = 0.0, inv_bound = 0.0, range_bound = 0.0;
    double max_conj = 0.0, max_inv = 0.0, max_range = 0.0;
    double picard_max_ratio = 0.0;
    bool residuals_ok = true;
    std::vector<QueryRow> rows;

    // holder phase
    bool holder_ran = false;
    double holder_alpha = 0.0;
    std::optional<HolderReport> holder_small;
    std::optional<HolderEstimate> holder_est;

    std::vector<std::string> failures;

    [[nodiscard]] bool pass() const {
        return failures.empty() && cert_passed && smallness_pass &&
               (!solved || residuals_ok) &&
               (!holder_ran || (holder_small && holder_small->pass));
    }
};

void write_report_json(const RunReport& r, const std::string& path);
void write_residuals_csv(const std::vector<QueryRow>& rows, const std::string& path);
void write_holder_csv(const HolderEstimate& est, const std::string& path);
void write_timings(const std::vector<std::pair<std::string, double>>& phases,
                   const std::string& path);

/// Human-oriented stdout summary (multi-line, ends with PASS or FAIL).
[[nodiscard]] std::string render_summary(const RunReport& r);

} // namespace dicholin
