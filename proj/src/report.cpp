#include "dicholin/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace dicholin {

namespace {

using nlohmann::json;

/// JSON has no infinity; alpha0 with rho = 0 serializes as a string sentinel.
json finite_or_sentinel(double v) {
    if (std::isinf(v)) return json("infinity");
    return json(v);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary); // binary: identical bytes on every platform
    if (!out) throw ConfigError("cannot write \"" + path + "\"");
    out << text;
}

} // namespace

void write_report_json(const RunReport& r, const std::string& path) {
    json j;
    j["command"] = r.command;
    j["seed"] = r.seed;
    j["norm"] = norm_name(r.p);
    j["generator"] = r.generator;
    j["pass"] = r.pass();
    j["failures"] = r.failures;

    j["certificate"] = {
        {"passed", r.cert_passed},
        {"D", r.D},
        {"lambda", r.lambda},
        {"rho", r.rho},
        {"alpha0", finite_or_sentinel(r.alpha0)},
        {"projection_bound", r.projection_bound},
        {"window", {r.n0, r.n1}},
        {"checks",
         {{"splitting", r.split_ok},
          {"nesting", r.nest_ok},
          {"stable_decay", r.stable_ok},
          {"unstable_decay", r.unstable_ok}}},
    };
    j["smallness"] = {{"c", r.c}, {"M", r.M}, {"q", r.q}, {"c_star", r.c_star},
                      {"pass", r.smallness_pass}};

    if (r.solved) {
        json rows = json::array();
        for (const QueryRow& row : r.rows) {
            json jr = {{"n", row.n},
                       {"x_id", row.x_id},
                       {"conj_residual", row.conj},
                       {"inv_residual_1", row.inv1},
                       {"inv_residual_2", row.inv2},
                       {"err_bound", row.err_bound}};
            jr["range_dist"] = row.range_dist ? json(*row.range_dist) : json();
            rows.push_back(std::move(jr));
        }
        j["solve"] = {{"depth", r.depth},
                      {"err_bound", r.err_bound},
                      {"bounds",
                       {{"conjugacy", r.conj_bound},
                        {"inverse", r.inv_bound},
                        {"range", r.range_bound}}},
                      {"max",
                       {{"conjugacy", r.max_conj},
                        {"inverse", r.max_inv},
                        {"range", r.max_range}}},
                      {"picard_max_ratio", r.picard_max_ratio},
                      {"residuals_ok", r.residuals_ok},
                      {"queries", std::move(rows)}};
    }

    if (r.holder_ran) {
        json h;
        h["alpha"] = r.holder_alpha;
        if (r.holder_small) {
            h["smallness"] = {{"pass", r.holder_small->pass},
                              {"c_in_unit", r.holder_small->c_in_unit},
                              {"backward_ok", r.holder_small->backward_ok},
                              {"series_finite", r.holder_small->series_finite},
                              {"k_invariance", r.holder_small->k_invariance},
                              {"r1", finite_or_sentinel(r.holder_small->r1)},
                              {"r2", finite_or_sentinel(r.holder_small->r2)},
                              {"L", finite_or_sentinel(r.holder_small->L)},
                              {"tau", r.holder_small->tau}};
            if (r.holder_small->K) h["smallness"]["K"] = *r.holder_small->K;
        }
        if (r.holder_est) {
            h["slope"] = r.holder_est->slope;
            h["used_scales"] = r.holder_est->used_count;
            json table = json::array();
            for (const HolderScale& s : r.holder_est->table)
                table.push_back({{"scale", s.scale}, {"max_diff", s.max_diff}, {"used", s.used}});
            h["table"] = std::move(table);
            h["warnings"] = r.holder_est->warnings;
        }
        j["holder"] = std::move(h);
    }

    j["timings_file"] = "timings.txt"; // wall-clock lives there, not here
    write_text(path, j.dump(2) + "\n");
}

void write_residuals_csv(const std::vector<QueryRow>& rows, const std::string& path) {
    std::string out = "n,x_id,conj_residual,inv_residual_1,inv_residual_2,range_dist,err_bound\n";
    for (const QueryRow& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.x_id) + "," + fmt(r.conj) + "," +
               fmt(r.inv1) + "," + fmt(r.inv2) + "," +
               (r.range_dist ? fmt(*r.range_dist) : "nan") + "," + fmt(r.err_bound) + "\n";
    }
    write_text(path, out);
}

void write_holder_csv(const HolderEstimate& est, const std::string& path) {
    std::string out = "scale,max_diff,slope_window\n";
    const HolderScale* prev = nullptr;
    for (const HolderScale& s : est.table) {
        std::string slope = "nan";
        if (s.used && prev) {
            double d = (std::log(s.max_diff) - std::log(prev->max_diff)) /
                       (std::log(s.scale) - std::log(prev->scale));
            slope = fmt(d);
        }
        out += fmt(s.scale) + "," + (s.used ? fmt(s.max_diff) : "nan") + "," + slope + "\n";
        if (s.used) prev = &s;
    }
    write_text(path, out);
}

void write_timings(const std::vector<std::pair<std::string, double>>& phases,
                   const std::string& path) {
    std::string out;
    for (const auto& [name, secs] : phases) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-8s %.3f s\n", name.c_str(), secs);
        out += buf;
    }
    write_text(path, out);
}

std::string render_summary(const RunReport& r) {
    std::string s;
    auto line = [&](const std::string& t) { s += t + "\n"; };
    line("command: " + r.command + "  system: " + r.generator + "  norm: " + norm_name(r.p));
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "certificate: %s  D=%.6g lambda=%.6g rho=%.6g alpha0=%.6g  |P| <= %.6g",
                  r.cert_passed ? "ok" : "FAILED", r.D, r.lambda, r.rho, r.alpha0,
                  r.projection_bound);
    line(buf);
    std::snprintf(buf, sizeof buf, "smallness: %s  c=%.6g q=%.6g (largest admissible c* = %.6g)",
                  r.smallness_pass ? "ok" : "FAILED", r.c, r.q, r.c_star);
    line(buf);
    if (r.solved) {
        std::snprintf(buf, sizeof buf,
                      "solve: %zu queries, depth N=%d, err_bound=%.3g; worst residuals "
                      "conj=%.3g inv=%.3g range=%.3g (%s)",
                      r.rows.size(), r.depth, r.err_bound, r.max_conj, r.max_inv, r.max_range,
                      r.residuals_ok ? "within bounds" : "OVER BOUND");
        line(buf);
        std::snprintf(buf, sizeof buf, "picard: max sup-change ratio %.4g (q=%.4g)",
                      r.picard_max_ratio, r.q);
        line(buf);
    }
    if (r.holder_ran) {
        std::string hl = "holder: ";
        if (r.holder_small)
            hl += std::string("smallness ") + (r.holder_small->pass ? "ok" : "FAILED") +
                  " (tau=" + fmt(r.holder_small->tau) + ")";
        if (r.holder_est) {
            std::snprintf(buf, sizeof buf, "  slope=%.4f over %d scales", r.holder_est->slope,
                          r.holder_est->used_count);
            hl += buf;
        }
        line(hl);
    }
    for (const std::string& f : r.failures) line("failure: " + f);
    line(r.pass() ? "PASS" : "FAIL");
    return s;
}

} // namespace dicholin
