// heatlab command-line driver: experiment orchestration over JSON configs,
// CSV/JSON emission, deterministic seeding, parallel sweeps.
#include "CLI11.hpp"
#include "json.hpp"

#include "heatlab/carleman.hpp"
#include "heatlab/control.hpp"
#include "heatlab/fit.hpp"
#include "heatlab/mesh.hpp"
#include "heatlab/observability.hpp"
#include "heatlab/pde.hpp"
#include "heatlab/potential.hpp"
#include "heatlab/rng.hpp"
#include "heatlab/spectral.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;
using namespace heatlab;

namespace {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reject unknown keys: every object in the config must match its schema.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw SchemaError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw SchemaError(where + ": unknown key '" + it.key() + "'");
    }
}

IntervalList parse_intervals(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw SchemaError(where + ": expected an array of pairs");
    IntervalList out;
    for (const auto& iv : arr) {
        if (!iv.is_array() || iv.size() != 2)
            throw SchemaError(where + ": each interval must be [lo, hi]");
        out.push_back({iv[0].get<double>(), iv[1].get<double>()});
    }
    return out;
}

// Deterministic CSV formatting: shortest round-trip representation.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Setup {
    SpaceGrid grid;
    TimeGrid tg;
    Potential V = Potential::constant(0.0);
    PotentialNorms vn;
    SpaceMask omega;       // empty indices when no "omega" key
    TimeSet E;             // empty weights when no "E" key
    bool has_omega = false;
    bool has_E = false;
};

Potential parse_potential(const json& p, const SpaceGrid& grid, const TimeGrid& tg) {
    check_keys(p, "potential",
               {"kind", "value", "V0", "g", "amplitude", "frequency", "beta"});
    std::string kind = p.at("kind").get<std::string>();
    if (kind == "constant") return Potential::constant(p.at("value").get<double>());
    if (kind == "separable") {
        const json& v0 = p.at("V0");
        const json& g = p.at("g");
        check_keys(v0, "potential.V0", {"kind", "amplitude", "frequency"});
        check_keys(g, "potential.g", {"kind", "beta"});
        if (v0.at("kind") != "sin" || g.at("kind") != "poly1p")
            throw SchemaError("potential: only V0.kind=sin with g.kind=poly1p is supported");
        return Potential::sine_poly(v0.at("amplitude").get<double>(),
                                    v0.at("frequency").get<int>(),
                                    g.at("beta").get<double>(), grid.a, grid.b, tg.T);
    }
    if (kind == "sine_poly")
        return Potential::sine_poly(p.at("amplitude").get<double>(),
                                    p.at("frequency").get<int>(),
                                    p.at("beta").get<double>(), grid.a, grid.b, tg.T);
    throw SchemaError("potential: unknown kind '" + kind + "'");
}

Setup parse_setup(const json& cfg) {
    check_keys(cfg, "config",
               {"domain", "time", "omega", "E", "potential", "y0", "params",
                "task", "axis", "values"});
    const json& dom = cfg.at("domain");
    check_keys(dom, "domain", {"a", "b", "n"});
    const json& tm = cfg.at("time");
    check_keys(tm, "time", {"T", "steps"});

    Setup s;
    s.grid = build_space_grid(dom.at("a").get<double>(), dom.at("b").get<double>(),
                              dom.at("n").get<int>());
    s.tg = build_time_grid(tm.at("T").get<double>(), tm.at("steps").get<int>());
    if (cfg.contains("potential")) s.V = parse_potential(cfg["potential"], s.grid, s.tg);
    s.vn = norms(s.V, s.grid, s.tg);
    if (cfg.contains("omega")) {
        s.omega = build_mask(s.grid, parse_intervals(cfg["omega"], "omega"));
        s.has_omega = true;
    }
    if (cfg.contains("E")) {
        s.E = build_time_set(s.tg, parse_intervals(cfg["E"], "E"));
        s.has_E = true;
    }
    return s;
}

ObservationRegion region_of(const Setup& s) {
    if (!s.has_omega) throw SchemaError("config: 'omega' is required for this task");
    ObservationRegion region;
    region.mask = s.omega;
    region.times = s.has_E ? s.E : build_time_set(s.tg, {{0.0, s.tg.T}});
    return region;
}

std::vector<double> parse_y0(const json& cfg, const Setup& s, std::uint64_t seed) {
    std::vector<double> y0(s.grid.n);
    if (!cfg.contains("y0")) {
        for (int i = 0; i < s.grid.n; ++i)
            y0[i] = std::sin(3.14159265358979323846 *
                             (s.grid.node(i) - s.grid.a) / (s.grid.b - s.grid.a));
        return y0;
    }
    const json& j = cfg["y0"];
    check_keys(j, "y0", {"kind", "mode", "amplitude"});
    std::string kind = j.at("kind").get<std::string>();
    double amp = j.value("amplitude", 1.0);
    if (kind == "sine") {
        int mode = j.value("mode", 1);
        for (int i = 0; i < s.grid.n; ++i)
            y0[i] = amp * std::sin(mode * 3.14159265358979323846 *
                                   (s.grid.node(i) - s.grid.a) / (s.grid.b - s.grid.a));
        return y0;
    }
    if (kind == "random") {
        SplitMix64 rng(derive_seed(seed, 0));
        for (double& v : y0) v = amp * rng.gaussian();
        return y0;
    }
    throw SchemaError("y0: unknown kind '" + kind + "'");
}

void write_file(const std::string& path, const std::string& contents) {
    if (path.empty() || path == "-") {
        std::cout << contents;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << contents;
}

// ---------------------------------------------------------------- tasks ----

int task_solve(const json& cfg, std::uint64_t seed, const std::string& out) {
    Setup s = parse_setup(cfg);
    if (cfg.contains("params")) check_keys(cfg["params"], "params", {});
    std::vector<double> y0 = parse_y0(cfg, s, seed);
    SpaceTimeField y = forward_solve(s.grid, s.tg, y0, s.V);
    std::ostringstream csv;
    csv << "t,x,value\n";
    for (int m = 0; m <= s.tg.steps; ++m)
        for (int i = 0; i < s.grid.n; ++i)
            csv << fmt(s.tg.level_time(m)) << ',' << fmt(s.grid.node(i)) << ','
                << fmt(y.at(m, i)) << '\n';
    write_file(out, csv.str());
    return 0;
}

json hum_summary(const HUMSolution& sol) {
    return json{{"terminal_ratio", sol.terminal_ratio},
                {"cost_l2", sol.cost_l2},
                {"cg_iterations", sol.cg_iterations},
                {"cg_residual", sol.cg_residual},
                {"eps", sol.eps},
                {"converged", sol.converged}};
}

int task_hum(const json& cfg, std::uint64_t seed, const std::string& out) {
    Setup s = parse_setup(cfg);
    HUMOptions opts;
    if (cfg.contains("params")) {
        const json& p = cfg["params"];
        check_keys(p, "params", {"eps", "cg_tol", "max_iter"});
        opts.eps = p.value("eps", opts.eps);
        opts.cg_tol = p.value("cg_tol", opts.cg_tol);
        opts.max_iter = p.value("max_iter", opts.max_iter);
    }
    HUMSolution sol = hum_solve(parse_y0(cfg, s, seed), s.V, region_of(s), s.grid, s.tg, opts);
    std::ostringstream csv;
    csv << "t,x,h\n";
    for (int m = 0; m < s.tg.steps; ++m)
        for (int i = 0; i < s.grid.n; ++i)
            csv << fmt(s.tg.half_time(m)) << ',' << fmt(s.grid.node(i)) << ','
                << fmt(sol.control.at(m, s.grid.n, i)) << '\n';
    write_file(out, csv.str());
    std::cout << hum_summary(sol).dump(2) << '\n';
    return 0;
}

int task_regctl(const json& cfg, std::uint64_t seed, const std::string& out) {
    Setup s = parse_setup(cfg);
    if (!s.has_omega || s.omega.intervals.size() != 1)
        throw SchemaError("regctl: 'omega' must be a single interval");
    RegularControlOptions opts;
    if (cfg.contains("params")) {
        const json& p = cfg["params"];
        check_keys(p, "params", {"eps", "cg_tol", "max_iter", "chi_ramp", "alpha"});
        opts.hum.eps = p.value("eps", opts.hum.eps);
        opts.hum.cg_tol = p.value("cg_tol", opts.hum.cg_tol);
        opts.hum.max_iter = p.value("max_iter", opts.hum.max_iter);
        opts.chi_ramp = p.value("chi_ramp", opts.chi_ramp);
        opts.alpha = p.value("alpha", opts.alpha);
    }
    RegularControl rc = regular_control(parse_y0(cfg, s, seed), s.V, s.grid, s.tg,
                                        s.omega.intervals[0], opts);
    std::ostringstream csv;
    csv << "t,x,h\n";
    for (int m = 0; m <= s.tg.steps; ++m)
        for (int i = 0; i < s.grid.n; ++i)
            csv << fmt(s.tg.level_time(m)) << ',' << fmt(s.grid.node(i)) << ','
                << fmt(rc.h_reg.at(m, i)) << '\n';
    write_file(out, csv.str());
    json summary{{"terminal_rel", rc.terminal_rel},
                 {"residual_norm", rc.residual_norm},
                 {"holder_norm", rc.holder_norm},
                 {"omega2", {rc.omega2.first, rc.omega2.second}},
                 {"omega3", {rc.omega3.first, rc.omega3.second}},
                 {"omega4", {rc.omega4.first, rc.omega4.second}},
                 {"hum", hum_summary(rc.hum)}};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

const char* kObscostHeader =
    "T,sup,grad_sup,dt_sup,neg_sup,omega_measure,E_measure,c_obs,log_c_obs,"
    "log_bound_new,log_bound_classical,iterations,converged";

std::string obscost_row(const json& cfg, std::uint64_t seed) {
    Setup s = parse_setup(cfg);
    CobsOptions opts;
    opts.seed = seed;
    double C = 1.0;
    if (cfg.contains("params")) {
        const json& p = cfg["params"];
        check_keys(p, "params", {"eps", "tol", "max_iter", "cg_tol", "C"});
        opts.eps = p.value("eps", opts.eps);
        opts.tol = p.value("tol", opts.tol);
        opts.max_iter = p.value("max_iter", opts.max_iter);
        opts.cg_tol = p.value("cg_tol", opts.cg_tol);
        C = p.value("C", C);
    }
    ObservationRegion region = region_of(s);
    ObservabilityEstimate est = cobs_estimate(s.V, region, s.grid, s.tg, opts);
    std::ostringstream row;
    row << fmt(s.tg.T) << ',' << fmt(s.vn.sup) << ',' << fmt(s.vn.grad_sup) << ','
        << fmt(s.vn.dt_sup) << ',' << fmt(s.vn.neg_sup) << ','
        << fmt(region.mask.measure) << ',' << fmt(region.times.measure) << ','
        << fmt(est.c_obs) << ',' << fmt(std::log(est.c_obs)) << ','
        << fmt(bound_new(s.tg.T, s.vn, C)) << ','
        << fmt(bound_classical(s.tg.T, s.vn, C)) << ',' << est.iterations << ','
        << (est.converged ? 1 : 0);
    return row.str();
}

int task_obscost(const json& cfg, std::uint64_t seed, const std::string& out) {
    write_file(out, std::string(kObscostHeader) + "\n" + obscost_row(cfg, seed) + "\n");
    return 0;
}

int task_carleman(const json& cfg, std::uint64_t seed, const std::string& out) {
    Setup s = parse_setup(cfg);
    if (!s.has_omega) throw SchemaError("carleman: 'omega' is required");
    CarlemanParams params;
    double center = 0.5 * (s.grid.a + s.grid.b);
    int corpus_count = 8;
    std::vector<double> taus;
    double tau_cal = -1.0;
    if (cfg.contains("params")) {
        const json& p = cfg["params"];
        check_keys(p, "params",
                   {"s", "lambda", "center", "tau_values", "corpus", "tau_cal", "C1"});
        params.s = p.value("s", params.s);
        params.lambda = p.value("lambda", params.lambda);
        center = p.value("center", center);
        corpus_count = p.value("corpus", corpus_count);
        tau_cal = p.value("tau_cal", tau_cal);
        if (p.contains("C1")) params.C1 = p["C1"].get<double>();
        if (p.contains("tau_values"))
            taus = p["tau_values"].get<std::vector<double>>();
    }
    if (taus.empty())
        for (double t = 0.5; t <= 64.0; t *= 2.0) taus.push_back(t);

    XiFunction xi = build_xi(s.grid, center);
    auto corpus = make_corpus(s.grid, s.tg, corpus_count, seed);
    if (tau_cal > 0.0)
        params.C1 = calibrate_c1(corpus, s.V, xi, params, s.omega, tau_cal);

    std::ostringstream csv;
    csv << "tau,lambda,lhs3,lhs1,lhs_neg1,rhs_f,rhs_local,holds\n";
    for (double tau : taus) {
        CarlemanParams p = params;
        p.tau = tau;
        // aggregate sides over the corpus; holds means holds for every member
        double l3 = 0, l1 = 0, ln1 = 0, rf = 0, rl = 0;
        bool all = true;
        for (const auto& w : corpus) {
            CarlemanSides cs = carleman_sides(w, s.V, xi, p, s.omega);
            l3 += cs.lhs3;
            l1 += cs.lhs1;
            ln1 += cs.lhs_neg1;
            rf += cs.rhs_f;
            rl += cs.rhs_local;
            all = all && cs.holds;
        }
        csv << fmt(tau) << ',' << fmt(p.lambda) << ',' << fmt(l3) << ',' << fmt(l1)
            << ',' << fmt(ln1) << ',' << fmt(rf) << ',' << fmt(rl) << ','
            << (all ? 1 : 0) << '\n';
    }
    write_file(out, csv.str());
    return 0;
}

int task_spectral(const json& cfg, std::uint64_t seed, const std::string& out) {
    (void)seed;
    Setup s = parse_setup(cfg);
    if (!s.has_omega) throw SchemaError("spectral: 'omega' is required");
    if (!s.V.time_independent_kind())
        throw SchemaError("spectral: potential must be time-independent");
    double M = 0.0;
    std::vector<double> ladder;
    if (cfg.contains("params")) {
        const json& p = cfg["params"];
        check_keys(p, "params", {"M", "lambda_ladder"});
        M = p.value("M", M);
        if (p.contains("lambda_ladder"))
            ladder = p["lambda_ladder"].get<std::vector<double>>();
    }
    HillBasis basis = hill_eigensolve(s.V, s.grid);
    if (M != 0.0) basis = shift_reduce(basis, M);
    if (ladder.empty()) {
        double base = std::abs(basis.eigenvalues[0]) * 1.05 + 1.0;
        for (int j = 0; j < 4; ++j) ladder.push_back(base * std::pow(2.0, j));
    }
    ConstantFitResult fit = constant_fit(basis, ladder, s.omega, M);
    std::ostringstream csv;
    csv << "lambda_cut,M,omega_measure,max_ratio,K,window_size\n";
    for (const auto& row : fit.rows)
        csv << fmt(row.lambda_cut) << ',' << fmt(row.M) << ','
            << fmt(row.omega_measure) << ',' << fmt(row.max_ratio) << ','
            << fmt(row.K) << ',' << row.window_size << '\n';
    write_file(out, csv.str());
    return 0;
}

// Set a dotted-path key ("potential.value") in a JSON config copy.
void set_path(json& cfg, const std::string& path, const json& value) {
    json* node = &cfg;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = path.find('.', pos);
        std::string key = path.substr(pos, dot - pos);
        if (key.empty()) throw SchemaError("sweep: bad axis path '" + path + "'");
        if (dot == std::string::npos) {
            if (!node->is_object() || !node->contains(key))
                throw SchemaError("sweep: axis '" + path + "' does not resolve in the config");
            (*node)[key] = value;
            return;
        }
        if (!node->is_object() || !node->contains(key))
            throw SchemaError("sweep: axis '" + path + "' does not resolve in the config");
        node = &(*node)[key];
        pos = dot + 1;
    }
}

int task_sweep(const json& cfg, std::uint64_t seed, const std::string& out, int jobs) {
    if (!cfg.contains("task") || !cfg.contains("axis") || !cfg.contains("values"))
        throw SchemaError("sweep: requires 'task', 'axis' and 'values'");
    std::string task = cfg.at("task").get<std::string>();
    if (task != "obscost")
        throw SchemaError("sweep: only the 'obscost' task is sweepable");
    std::string axis = cfg.at("axis").get<std::string>();
    std::vector<json> values = cfg.at("values").get<std::vector<json>>();

    json base = cfg;
    base.erase("task");
    base.erase("axis");
    base.erase("values");
    parse_setup(base);  // validate the base schema before spawning workers
    if (!values.empty()) {
        json probe = base;
        set_path(probe, axis, values.front());  // validate the axis path
    }

    // rows keyed by input index; execution order does not matter
    std::vector<std::string> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t j = next.fetch_add(1);
            if (j >= rows.size()) return;
            try {
                json one = base;
                set_path(one, axis, values[j]);
                rows[j] = fmt(values[j].is_number() ? values[j].get<double>() : double(j)) +
                          "," + obscost_row(one, derive_seed(seed, j)) + ",";
            } catch (const std::exception& e) {
                std::string msg = e.what();
                for (char& c : msg)
                    if (c == ',' || c == '\n') c = ';';
                rows[j] = fmt(values[j].is_number() ? values[j].get<double>() : double(j)) +
                          ",,,,,,,,,,,,,," + msg;
            }
        }
    };
    int nthreads = std::max(1, std::min<int>(jobs, int(values.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "axis_value," << kObscostHeader << ",error\n";
    for (const auto& r : rows) csv << r << '\n';
    write_file(out, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heatlab: 1D heat-equation observability and control experiments"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::uint64_t seed = 1;
    int jobs = 1;
    for (const char* name :
         {"solve", "hum", "regctl", "obscost", "carleman", "spectral", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config path")->required();
        sub->add_option("--seed", seed, "master seed (u64)");
        sub->add_option("--out", out_path, "output CSV path ('-' = stdout)");
        sub->add_option("--jobs", jobs, "parallel workers (sweep only)");
    }
    CLI11_PARSE(app, argc, argv);
    std::string task = app.get_subcommands().front()->get_name();

    try {
        json cfg;
        {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config: " + config_path);
            cfg = json::parse(in);
        }
        if (task == "solve") return task_solve(cfg, seed, out_path);
        if (task == "hum") return task_hum(cfg, seed, out_path);
        if (task == "regctl") return task_regctl(cfg, seed, out_path);
        if (task == "obscost") return task_obscost(cfg, seed, out_path);
        if (task == "carleman") return task_carleman(cfg, seed, out_path);
        if (task == "spectral") return task_spectral(cfg, seed, out_path);
        if (task == "sweep") return task_sweep(cfg, seed, out_path, jobs);
        throw std::runtime_error("unknown task: " + task);
    } catch (const SchemaError& e) {
        std::cerr << json{{"error", {{"type", "schema"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", {{"type", "schema"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"type", "runtime"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 1;
    }
}
