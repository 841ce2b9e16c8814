#include "dicholin/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

namespace dicholin {

namespace {

int thread_budget() {
    const char* env = std::getenv("DICHOLIN_THREADS");
    long v = env ? std::strtol(env, nullptr, 10) : 0;
    if (v <= 0) v = static_cast<long>(std::thread::hardware_concurrency());
    return static_cast<int>(std::max(1L, v));
}

/// Queries are drawn up front, single threaded, so the sample set depends
/// only on the seed and never on the worker count.
std::vector<std::pair<long, Vec>> draw_queries(const ExperimentConfig& cfg,
                                               const GeneratedSystem& sys) {
    if (cfg.queries.mode == QuerySpec::Mode::List) return cfg.queries.items;

    std::mt19937_64 rng(cfg.seed ^ 0xd1ce0fbeefULL);
    std::uniform_real_distribution<double> u(-cfg.queries.radius, cfg.queries.radius);
    const int d = sys.seq.dense_dim();
    std::vector<long> support;
    if (d == 0) {
        auto [a0, a1] = cfg.f.action_window();
        for (long i = std::min(a0, -2L); i <= std::max(a1, 2L); ++i) support.push_back(i);
    }
    std::vector<std::pair<long, Vec>> out;
    out.reserve(static_cast<size_t>(cfg.queries.count));
    for (int i = 0; i < cfg.queries.count; ++i) {
        long n = cfg.queries.times[static_cast<size_t>(i) % cfg.queries.times.size()];
        Vec x;
        if (d > 0) {
            std::vector<double> raw(static_cast<size_t>(d));
            for (double& t : raw) t = u(rng);
            x = Vec::dense(std::move(raw));
        } else {
            x = Vec::zero_sparse();
            for (long k : support) x.set(k, u(rng));
        }
        out.emplace_back(n, std::move(x));
    }
    return out;
}

/// Largest consecutive sup-change ratio after the first sweep, ignoring
/// steps already at rounding level.
double picard_ratio(const std::vector<double>& changes) {
    double worst = 0.0;
    double floor = 1e-13 * std::max(1.0, changes.empty() ? 1.0 : changes.front());
    for (size_t i = 1; i + 1 < changes.size(); ++i)
        if (changes[i] > floor)
            worst = std::max(worst, changes[i + 1] / changes[i]);
    return worst;
}

} // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& command,
                          const std::string& out_dir) {
    if (command != "verify" && command != "solve" && command != "holder" && command != "all")
        throw ConfigError("command must be one of verify, solve, holder, all");
    std::filesystem::create_directories(out_dir);
    auto out_path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    using clock = std::chrono::steady_clock;
    std::vector<std::pair<std::string, double>> phases;
    auto t0 = clock::now();
    auto mark = [&](const std::string& name) {
        auto t1 = clock::now();
        phases.emplace_back(name, std::chrono::duration<double>(t1 - t0).count());
        t0 = t1;
    };

    RunOutcome out;
    RunReport& rep = out.report;
    rep.command = command;
    rep.seed = cfg.seed;
    rep.p = cfg.p;
    rep.generator = cfg.generator;
    rep.c = cfg.f.lipschitz();
    rep.M = cfg.f.sup_bound();
    rep.n0 = cfg.n0;
    rep.n1 = cfg.n1;

    const bool want_solve = command == "solve" || command == "all";
    const bool want_holder = (command == "holder" || command == "all") && cfg.holder.has_value();
    if (command == "holder" && !cfg.holder)
        throw ConfigError("holder command needs a holder block in the config");

    auto finish = [&](int code) {
        write_report_json(rep, out_path("report.json"));
        mark("write");
        write_timings(phases, out_path("timings.txt"));
        out.exit_code = code;
        return out;
    };

    // Build + verify. A generator that cannot certify itself throws
    // VerificationFailure; that is a check failure, not a config error.
    GeneratedSystem sys;
    try {
        sys = build_system(cfg);
    } catch (const VerificationFailure& e) {
        rep.failures.push_back(e.what());
        mark("verify");
        return finish(2);
    }
    const DichotomyCertificate& cert = sys.cert;
    rep.cert_passed = cert.report.passed();
    rep.D = cert.D;
    rep.lambda = cert.lambda;
    auto cw = sys.seq.canonical_window();
    rep.rho = growth_bound(sys.seq, cw.first, cw.second, cfg.p);
    rep.alpha0 = alpha_max(cert.lambda, rep.rho);
    rep.projection_bound = cert.report.projection_bound;
    rep.split_ok = cert.report.splitting.passed;
    rep.nest_ok = cert.report.nesting.passed;
    rep.stable_ok = cert.report.stable_decay.passed;
    rep.unstable_ok = cert.report.unstable_decay.passed;

    // Spot-check the declared perturbation bounds before trusting them.
    if (!cfg.f.is_zero()) {
        AuditResult audit = audit_constants(cfg.f, sys.seq.dense_dim(), cfg.p, 64,
                                            std::max(1.0, cfg.queries.radius), cfg.seed);
        if (audit.c_flagged || audit.m_flagged)
            throw ConfigError("declared perturbation bounds are empirically violated: "
                              "measured c >= " + std::to_string(audit.c_emp) +
                              ", M >= " + std::to_string(audit.m_emp));
    }

    Smallness small = smallness_check(cfg.f.lipschitz(), cert.D, cert.lambda);
    rep.q = small.q;
    rep.c_star = small.c_star;
    rep.smallness_pass = small.pass;
    mark("verify");

    if (!small.pass && (want_solve || want_holder)) {
        rep.failures.push_back("contraction gate failed: q = " + std::to_string(small.q) +
                               " >= 1; shrink the perturbation below c* = " +
                               std::to_string(small.c_star));
        return finish(2);
    }

    std::optional<ConjugacyProblem> prob;
    if (want_solve || want_holder) {
        NonlinearSystem nls(sys.seq, cfg.f, cfg.p);
        prob.emplace(std::move(nls), cert, cfg.tail_tol, cfg.iter_tol);
        rep.depth = prob->depth();
        rep.err_bound = prob->err_bound();
    }

    if (want_solve) {
        std::vector<std::pair<long, Vec>> queries = draw_queries(cfg, sys);
        rep.rows.assign(queries.size(), QueryRow{});

        std::atomic<bool> failed{false};
        std::string failure_msg;
        std::mutex failure_mu;
        auto work = [&](size_t begin, size_t stride) {
            for (size_t i = begin; i < queries.size(); i += stride) {
                if (failed.load(std::memory_order_relaxed)) return;
                try {
                    const auto& [n, x] = queries[i];
                    QueryRow row;
                    row.n = n;
                    row.x_id = static_cast<int>(i);
                    row.err_bound = prob->err_bound();

                    HSolve hs = prob->solve_h(n, x);
                    row.picard_ratio = picard_ratio(hs.sup_changes);
                    const Vec& hn = hs.value;

                    HSolve hs2 = prob->solve_h(n + 1, cert.seq.at(n).apply(x));
                    row.picard_ratio = std::max(row.picard_ratio, picard_ratio(hs2.sup_changes));
                    Vec lhs = hs2.value - cert.seq.at(n).apply(hn) -
                              cfg.f.eval(n, x + hn);
                    row.conj = lhs.norm(cfg.p);

                    HbarSolve hb1 = prob->solve_hbar(n, x + hn);
                    row.inv1 = (hn + hb1.value).norm(cfg.p);
                    HbarSolve hb2 = prob->solve_hbar(n, x);
                    HSolve hs3 = prob->solve_h(n, x + hb2.value);
                    row.picard_ratio = std::max(row.picard_ratio, picard_ratio(hs3.sup_changes));
                    row.inv2 = (hb2.value + hs3.value).norm(cfg.p);
                    row.hbar_err = std::max(hb1.err_bound, hb2.err_bound);

                    row.range_dist = range_distance(cert.seq, cert.proj, n, hn, cfg.p);
                    rep.rows[i] = std::move(row);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    failed.store(true);
                    if (failure_msg.empty()) failure_msg = e.what();
                }
            }
        };

        int threads = std::min<int>(thread_budget(), static_cast<int>(queries.size()));
        if (threads <= 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<size_t>(threads));
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(work, static_cast<size_t>(t), static_cast<size_t>(threads));
            for (std::thread& th : pool) th.join();
        }
        if (failed.load()) {
            rep.failures.push_back("query evaluation failed: " + failure_msg);
            mark("solve");
            return finish(2);
        }

        rep.solved = true;
        const double erho = std::exp(rep.rho);
        rep.conj_bound = (1.0 + erho + rep.c) * rep.err_bound;
        rep.range_bound = rep.err_bound + 1e-12;
        double worst_hbar = 0.0;
        for (const QueryRow& row : rep.rows) {
            rep.max_conj = std::max(rep.max_conj, row.conj);
            rep.max_inv = std::max({rep.max_inv, row.inv1, row.inv2});
            if (row.range_dist) rep.max_range = std::max(rep.max_range, *row.range_dist);
            rep.picard_max_ratio = std::max(rep.picard_max_ratio, row.picard_ratio);
            worst_hbar = std::max(worst_hbar, row.hbar_err);
            bool ok = row.conj <= rep.conj_bound &&
                      row.inv1 <= 2.0 * rep.err_bound + row.hbar_err &&
                      row.inv2 <= 2.0 * rep.err_bound + row.hbar_err &&
                      (!row.range_dist || *row.range_dist <= rep.range_bound);
            if (!ok) rep.residuals_ok = false;
        }
        rep.inv_bound = 2.0 * rep.err_bound + worst_hbar;
        if (!rep.residuals_ok)
            rep.failures.push_back("a residual exceeded its printed bound (see residuals.csv)");
        write_residuals_csv(rep.rows, out_path("residuals.csv"));
        mark("solve");
    }

    if (want_holder) {
        const HolderBlock& hb = *cfg.holder;
        rep.holder_ran = true;
        rep.holder_alpha = hb.alpha;
        HolderBudget budget = HolderBudget::make(cert.lambda, rep.rho, cert.D,
                                                 cfg.f.sup_bound(), cfg.f.lipschitz(), hb.alpha);
        rep.holder_small = holder_smallness(budget);
        if (!rep.holder_small->pass) {
            rep.failures.push_back("holder smallness failed: threshold tau = " +
                                   std::to_string(rep.holder_small->tau) + " > 1");
        } else {
            Vec center;
            if (hb.center) {
                center = *hb.center;
            } else if (sys.seq.dense_dim() > 0) {
                center = Vec::zeros(sys.seq.dense_dim());
            } else {
                center = Vec::zero_sparse();
            }
            try {
                rep.holder_est = empirical_holder(*prob, hb.n, center, hb.scales, hb.pairs,
                                                  static_cast<unsigned long>(cfg.seed));
                write_holder_csv(*rep.holder_est, out_path("holder.csv"));
            } catch (const ConvergenceError& e) {
                rep.failures.push_back(std::string("holder sampling failed: ") + e.what());
            }
        }
        mark("holder");
    }

    return finish(rep.pass() ? 0 : 2);
}

} // namespace dicholin
