#include "dicholin/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace dicholin {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

void expect_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) bad("unknown key \"" + it.key() + "\" in " + where);
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where + " must be a number");
    return j.get<double>();
}

long integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where + " must be an integer");
    return j.get<long>();
}

Matrix matrix_of(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) bad(where + " must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) {
        if (!r.is_array() || r.empty()) bad(where + " rows must be non-empty arrays");
        std::vector<double> row;
        for (const auto& v : r) row.push_back(num(v, where + " entry"));
        if (!rows.empty() && rows.front().size() != row.size())
            bad(where + " rows have uneven lengths");
        rows.push_back(std::move(row));
    }
    return Matrix::from_rows(rows);
}

Norm norm_of(const json& j) {
    std::string s = j.is_string() ? j.get<std::string>() : "";
    if (s == "one" || s == "1") return Norm::One;
    if (s == "two" || s == "2") return Norm::Two;
    if (s == "inf") return Norm::Inf;
    bad("norm must be one of \"one\", \"two\", \"inf\"");
}

Vec vec_of(const json& j, const std::string& where) {
    // Dense: [1.0, 2.0]. Sparse: {"-1": 0.5, "3": 2.0}.
    if (j.is_array()) {
        std::vector<double> d;
        for (const auto& v : j) d.push_back(num(v, where));
        if (d.empty()) bad(where + " must be non-empty");
        return Vec::dense(std::move(d));
    }
    if (j.is_object()) {
        Vec v = Vec::zero_sparse();
        for (auto it = j.begin(); it != j.end(); ++it) {
            try {
                v.set(std::stol(it.key()), num(it.value(), where));
            } catch (const std::invalid_argument&) {
                bad(where + " sparse keys must be integers");
            }
        }
        return v;
    }
    bad(where + " must be an array (dense) or object (sparse)");
}

WeightRule weights_of(const json& j) {
    expect_keys(j, "system.weights", {"n_min", "window"});
    if (!j.contains("n_min") || !j.contains("window")) bad("weights need n_min and window");
    WeightRule w;
    w.n_min = integer(j.at("n_min"), "weights.n_min");
    for (const auto& v : j.at("window")) w.window.push_back(num(v, "weights.window"));
    if (w.window.empty()) bad("weights.window must be non-empty");
    return w;
}

PerturbTerm term_of(const json& j) {
    expect_keys(j, "perturbation term", {"prim", "scale", "in", "out", "clamp_bound"});
    PerturbTerm t;
    std::string prim = j.value("prim", "");
    if (prim == "sin") t.prim = PerturbTerm::Prim::Sin;
    else if (prim == "clamp_linear") t.prim = PerturbTerm::Prim::ClampLinear;
    else if (prim == "const") t.prim = PerturbTerm::Prim::Const;
    else bad("term prim must be \"sin\", \"clamp_linear\" or \"const\"");
    if (!j.contains("scale")) bad("term needs a scale");
    t.scale = num(j.at("scale"), "term.scale");
    t.in_index = j.contains("in") ? integer(j.at("in"), "term.in") : 0;
    t.out_index = j.contains("out") ? integer(j.at("out"), "term.out") : 0;
    if (j.contains("clamp_bound")) {
        t.clamp_bound = num(j.at("clamp_bound"), "term.clamp_bound");
        if (t.clamp_bound <= 0.0) bad("clamp_bound must be positive");
    }
    return t;
}

PerturbationSequence perturbation_of(const json& j) {
    expect_keys(j, "perturbation", {"c", "M", "terms", "windows"});
    if (!j.contains("c") || !j.contains("M"))
        bad("perturbation needs declared c and M bounds");
    double c = num(j.at("c"), "perturbation.c");
    double M = num(j.at("M"), "perturbation.M");
    if (c < 0.0 || M < 0.0) bad("perturbation bounds must be non-negative");

    if (j.contains("windows")) {
        if (j.contains("terms")) bad("perturbation takes terms or windows, not both");
        const json& w = j.at("windows");
        expect_keys(w, "perturbation.windows", {"n_min", "exprs"});
        if (!w.contains("n_min") || !w.contains("exprs"))
            bad("perturbation.windows needs n_min and exprs");
        std::vector<PerturbExpr> es;
        for (const auto& ej : w.at("exprs")) {
            PerturbExpr e;
            for (const auto& tj : ej) e.terms.push_back(term_of(tj));
            es.push_back(std::move(e));
        }
        if (es.empty()) bad("perturbation.windows.exprs must be non-empty");
        return PerturbationSequence::windowed(integer(w.at("n_min"), "windows.n_min"),
                                              std::move(es), c, M);
    }
    PerturbExpr e;
    if (j.contains("terms"))
        for (const auto& tj : j.at("terms")) e.terms.push_back(term_of(tj));
    return PerturbationSequence::constant_in_time(std::move(e), c, M);
}

ItineraryMap itinerary_of(const json& j) {
    expect_keys(j, "system.itinerary", {"kind", "anchor", "letters"});
    std::string kind = j.value("kind", "");
    if (!j.contains("letters")) bad("itinerary needs letters");
    std::vector<int> letters;
    for (const auto& v : j.at("letters"))
        letters.push_back(static_cast<int>(integer(v, "itinerary.letters")));
    long anchor = j.contains("anchor") ? integer(j.at("anchor"), "itinerary.anchor") : 0;
    if (kind == "periodic") return ItineraryMap::periodic(std::move(letters), anchor);
    if (kind == "windowed") return ItineraryMap::windowed(anchor, std::move(letters));
    bad("itinerary kind must be \"periodic\" or \"windowed\"");
}

void parse_system(const json& j, ExperimentConfig& cfg) {
    expect_keys(j, "system",
                {"generator", "norm", "weights", "stable_upper", "unstable_lower", "crossing",
                 "contraction_only", "letters", "lambdas", "splitting", "connector", "itinerary",
                 "n_min", "matrices", "projections", "D", "lambda"});
    cfg.generator = j.value("generator", "");
    if (j.contains("norm")) cfg.p = norm_of(j.at("norm"));

    if (cfg.generator == "dimension_exchange") {
        cfg.p = Norm::Inf; // fixed by the generator
    } else if (cfg.generator == "weighted_shift") {
        ShiftSpec s;
        if (j.contains("weights")) s.omega = weights_of(j.at("weights"));
        if (j.contains("stable_upper")) s.stable_upper = num(j.at("stable_upper"), "stable_upper");
        if (j.contains("unstable_lower"))
            s.unstable_lower = num(j.at("unstable_lower"), "unstable_lower");
        if (j.contains("crossing")) s.crossing = integer(j.at("crossing"), "crossing");
        if (j.contains("contraction_only")) {
            if (!j.at("contraction_only").is_boolean()) bad("contraction_only must be a boolean");
            s.contraction_only = j.at("contraction_only").get<bool>();
        }
        s.p = cfg.p;
        cfg.shift = std::move(s);
    } else if (cfg.generator == "family_switch") {
        FamilySpec fam;
        if (!j.contains("letters") || !j.contains("lambdas") || !j.contains("splitting") ||
            !j.contains("itinerary"))
            bad("family_switch needs letters, lambdas, splitting and itinerary");
        for (const auto& m : j.at("letters")) fam.letters.push_back(matrix_of(m, "letters"));
        for (const auto& v : j.at("lambdas")) fam.lambdas.push_back(num(v, "lambdas"));
        fam.splitting = matrix_of(j.at("splitting"), "splitting");
        if (j.contains("connector")) fam.connector = matrix_of(j.at("connector"), "connector");
        fam.itinerary = itinerary_of(j.at("itinerary"));
        fam.p = cfg.p;
        cfg.family = std::move(fam);
    } else if (cfg.generator == "explicit") {
        if (!j.contains("matrices") || !j.contains("projections") || !j.contains("lambda"))
            bad("explicit systems need matrices, projections and lambda");
        cfg.ex_n_min = j.contains("n_min") ? integer(j.at("n_min"), "n_min") : 0;
        for (const auto& m : j.at("matrices")) cfg.ex_matrices.push_back(matrix_of(m, "matrices"));
        for (const auto& m : j.at("projections"))
            cfg.ex_projections.push_back(matrix_of(m, "projections"));
        cfg.ex_D = j.contains("D") ? num(j.at("D"), "D") : 1.0;
        cfg.ex_lambda = num(j.at("lambda"), "lambda");
        if (cfg.ex_matrices.empty() || cfg.ex_projections.empty())
            bad("explicit systems need at least one matrix and one projection");
    } else {
        bad("generator must be one of dimension_exchange, weighted_shift, family_switch, "
            "explicit");
    }
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open \"" + path + "\"");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) bad("top level must be an object");
    expect_keys(root, "top level",
                {"system", "perturbation", "tolerances", "window", "queries", "holder", "seed"});

    ExperimentConfig cfg;
    if (!root.contains("system")) bad("missing system block");
    parse_system(root.at("system"), cfg);

    if (root.contains("perturbation")) cfg.f = perturbation_of(root.at("perturbation"));

    if (root.contains("tolerances")) {
        const json& t = root.at("tolerances");
        expect_keys(t, "tolerances", {"tail_tol", "iter_tol"});
        if (t.contains("tail_tol")) cfg.tail_tol = num(t.at("tail_tol"), "tail_tol");
        if (t.contains("iter_tol")) cfg.iter_tol = num(t.at("iter_tol"), "iter_tol");
        if (cfg.tail_tol <= 0.0 || cfg.iter_tol <= 0.0) bad("tolerances must be positive");
    }

    if (root.contains("window")) {
        const json& w = root.at("window");
        expect_keys(w, "window", {"n0", "n1"});
        if (!w.contains("n0") || !w.contains("n1")) bad("window needs n0 and n1");
        cfg.n0 = integer(w.at("n0"), "window.n0");
        cfg.n1 = integer(w.at("n1"), "window.n1");
        if (cfg.n0 > cfg.n1) bad("window.n0 must not exceed window.n1");
    }

    if (root.contains("queries")) {
        const json& q = root.at("queries");
        expect_keys(q, "queries", {"mode", "items", "count", "radius", "times"});
        std::string mode = q.value("mode", "sampler");
        if (mode == "list") {
            cfg.queries.mode = QuerySpec::Mode::List;
            if (!q.contains("items")) bad("query list needs items");
            for (const auto& it : q.at("items")) {
                expect_keys(it, "query item", {"n", "x"});
                if (!it.contains("n") || !it.contains("x")) bad("query items need n and x");
                cfg.queries.items.emplace_back(integer(it.at("n"), "query.n"),
                                               vec_of(it.at("x"), "query.x"));
            }
            if (cfg.queries.items.empty()) bad("query list must be non-empty");
        } else if (mode == "sampler") {
            cfg.queries.mode = QuerySpec::Mode::Sampler;
            if (q.contains("count")) {
                cfg.queries.count = static_cast<int>(integer(q.at("count"), "queries.count"));
                if (cfg.queries.count < 1) bad("queries.count must be positive");
            }
            if (q.contains("radius")) {
                cfg.queries.radius = num(q.at("radius"), "queries.radius");
                if (cfg.queries.radius <= 0.0) bad("queries.radius must be positive");
            }
            if (q.contains("times")) {
                cfg.queries.times.clear();
                for (const auto& v : q.at("times"))
                    cfg.queries.times.push_back(integer(v, "queries.times"));
                if (cfg.queries.times.empty()) bad("queries.times must be non-empty");
            }
        } else {
            bad("queries.mode must be \"list\" or \"sampler\"");
        }
    }

    if (root.contains("holder")) {
        const json& h = root.at("holder");
        expect_keys(h, "holder", {"alpha", "scales", "pairs", "n", "center"});
        HolderBlock hb;
        if (!h.contains("alpha") || !h.contains("scales")) bad("holder needs alpha and scales");
        hb.alpha = num(h.at("alpha"), "holder.alpha");
        for (const auto& v : h.at("scales")) hb.scales.push_back(num(v, "holder.scales"));
        if (hb.scales.empty()) bad("holder.scales must be non-empty");
        if (h.contains("pairs")) {
            hb.pairs = static_cast<int>(integer(h.at("pairs"), "holder.pairs"));
            if (hb.pairs < 1) bad("holder.pairs must be positive");
        }
        if (h.contains("n")) hb.n = integer(h.at("n"), "holder.n");
        if (h.contains("center")) hb.center = vec_of(h.at("center"), "holder.center");
        cfg.holder = std::move(hb);
    }

    if (root.contains("seed")) {
        long s = integer(root.at("seed"), "seed");
        if (s < 0) bad("seed must be non-negative");
        cfg.seed = static_cast<unsigned long long>(s);
    }
    return cfg;
}

GeneratedSystem build_system(const ExperimentConfig& cfg) {
    if (cfg.generator == "dimension_exchange") return make_dimension_exchange(cfg.n0, cfg.n1);
    if (cfg.generator == "weighted_shift") return make_weighted_shift(cfg.shift, cfg.n0, cfg.n1);
    if (cfg.generator == "family_switch") return make_family_switch(cfg.family, cfg.n0, cfg.n1);

    // explicit
    std::vector<Op> ops;
    for (const Matrix& m : cfg.ex_matrices) ops.push_back(Op::dense(m));
    std::vector<Projector> ps;
    for (const Matrix& m : cfg.ex_projections) ps.push_back(Projector::dense(m));
    GeneratedSystem out;
    out.seq = OperatorSequence::windowed(cfg.ex_n_min, std::move(ops));
    out.proj = cfg.ex_projections.size() == 1
                   ? ProjectionFamily::constant(ps.front())
                   : ProjectionFamily::windowed(cfg.ex_n_min, std::move(ps));
    out.cert = certify(out.seq, out.proj, cfg.n0, cfg.n1, cfg.ex_D, cfg.ex_lambda, cfg.p);
    if (!out.cert.report.passed())
        throw VerificationFailure("explicit system failed verification", out.cert.report);
    return out;
}

} // namespace dicholin
