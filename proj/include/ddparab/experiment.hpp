#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddparab/decomposition.hpp"
#include "ddparab/fem.hpp"
#include "ddparab/output.hpp"
#include "ddparab/time_schemes.hpp"

namespace ddparab::experiment {

/// Model problem: k = 1, c = 0, f = x1 - x2, u0 = 0.
inline Coefficients model_coefficients() {
    Coefficients c;
    c.f = [](double x1, double x2, double) { return x1 - x2; };
    return c;
}

struct ExperimentConfig {
    std::size_t n_intervals = 50;
    std::size_t n_steps = 50;
    double final_time = 0.1;
    double sigma = 1.0;
    double split = 0.5;
    double delta = 0.05;
    /// Decomposition schemes to compare against the theta benchmark.
    std::set<SchemeKind> schemes{SchemeKind::factorized_pu, SchemeKind::indicator_dd};
    std::filesystem::path output_dir = "out";
    double tol = 1e-10;
    std::size_t max_iter = 0;
    std::uint64_t seed = 20240101;
    std::size_t jobs = 1;

    StripDecomposition decomposition() const { return {split, delta}; }

    SchemeConfig scheme_config(SchemeKind kind) const {
        SchemeConfig c;
        c.kind = kind;
        c.sigma = sigma;
        c.final_time = final_time;
        c.n_steps = n_steps;
        if (kind != SchemeKind::theta) c.decomposition = decomposition();
        c.solver = {tol, max_iter};
        return c;
    }

    void validate() const {
        if (n_intervals < 2) throw std::invalid_argument("ExperimentConfig: n_intervals must be >= 2");
        if (jobs == 0) throw std::invalid_argument("ExperimentConfig: jobs must be >= 1");
        scheme_config(SchemeKind::theta).validate();
        for (SchemeKind k : schemes) scheme_config(k).validate();
    }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json schemes = nlohmann::json::array();
    for (SchemeKind k : c.schemes) schemes.push_back(std::string(to_string(k)));
    return {{"n_intervals", c.n_intervals}, {"n_steps", c.n_steps}, {"T", c.final_time},
            {"sigma", c.sigma},             {"split", c.split},     {"delta", c.delta},
            {"schemes", schemes},           {"output_dir", c.output_dir.string()},
            {"tol", c.tol},                 {"max_iter", c.max_iter}, {"seed", c.seed},
            {"jobs", c.jobs}};
}

/// Reads keys that are present; missing keys keep the values already in `c`.
inline void apply_json(const nlohmann::json& j, ExperimentConfig& c) {
    if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "n_intervals") c.n_intervals = value.get<std::size_t>();
        else if (key == "n_steps") c.n_steps = value.get<std::size_t>();
        else if (key == "T") c.final_time = value.get<double>();
        else if (key == "sigma") c.sigma = value.get<double>();
        else if (key == "split") c.split = value.get<double>();
        else if (key == "delta") c.delta = value.get<double>();
        else if (key == "output_dir") c.output_dir = value.get<std::string>();
        else if (key == "tol") c.tol = value.get<double>();
        else if (key == "max_iter") c.max_iter = value.get<std::size_t>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "jobs") c.jobs = value.get<std::size_t>();
        else if (key == "schemes") {
            c.schemes.clear();
            for (const auto& s : value) {
                const SchemeKind k = parse_scheme_kind(s.get<std::string>());
                if (k != SchemeKind::theta) c.schemes.insert(k);
            }
        } else {
            throw std::invalid_argument("experiment config: unknown key '" + key + "'");
        }
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    apply_json(nlohmann::json::parse(in), base);
    return base;
}

/// eps_b(t^n) = ||y_b - y_bar|| in the lumped-mass L2 norm.
struct ErrorSeries {
    std::vector<double> times;
    std::vector<double> benchmark_norm;
    std::vector<double> epsilon_pu;         ///< empty when the scheme was not run
    std::vector<double> epsilon_indicator;  ///< empty when the scheme was not run

    output::Table table() const {
        output::Table t;
        t.header = {"t", "benchmark_norm"};
        if (!epsilon_pu.empty()) t.header.push_back("eps1");
        if (!epsilon_indicator.empty()) t.header.push_back("eps2");
        for (std::size_t n = 0; n < times.size(); ++n) {
            std::vector<double> row{times[n], benchmark_norm[n]};
            if (!epsilon_pu.empty()) row.push_back(epsilon_pu[n]);
            if (!epsilon_indicator.empty()) row.push_back(epsilon_indicator[n]);
            t.rows.push_back(std::move(row));
        }
        return t;
    }
};

struct ExperimentResult {
    ExperimentConfig config;
    ErrorSeries series;
    /// Final-time nodal fields on the full grid (boundary zeros).
    Vector benchmark_final;
    Vector deviation_pu_final;
    Vector deviation_indicator_final;
    std::vector<std::string> failures;
    /// Full interior trajectories, kept for dumps.
    Trajectory benchmark;
    std::optional<Trajectory> pu;
    std::optional<Trajectory> indicator;

    bool ok() const { return failures.empty(); }
};

/// Runs the theta benchmark and the selected decomposition schemes on one
/// mesh and time grid. Independent runs go to up to `config.jobs` threads;
/// each run is sequential, so the result does not depend on `jobs`.
inline ExperimentResult run_base_experiment(const ExperimentConfig& config) {
    config.validate();
    const Discretization disc(config.n_intervals, model_coefficients());
    const Vector y0(disc.unknowns(), 0.0);

    auto launch = [&](SchemeKind kind) { return run(config.scheme_config(kind), disc, y0); };
    std::vector<SchemeKind> kinds{SchemeKind::theta};
    kinds.insert(kinds.end(), config.schemes.begin(), config.schemes.end());
    std::vector<Trajectory> trajs(kinds.size());
    for (std::size_t first = 0; first < kinds.size(); first += config.jobs) {
        const std::size_t last = std::min(kinds.size(), first + config.jobs);
        if (config.jobs == 1) {
            trajs[first] = launch(kinds[first]);
            continue;
        }
        std::vector<std::future<Trajectory>> pending;
        for (std::size_t i = first; i < last; ++i) pending.push_back(std::async(std::launch::async, launch, kinds[i]));
        for (std::size_t i = first; i < last; ++i) trajs[i] = pending[i - first].get();
    }

    ExperimentResult result;
    result.config = config;
    result.benchmark = std::move(trajs[0]);
    for (std::size_t i = 1; i < kinds.size(); ++i) {
        if (kinds[i] == SchemeKind::factorized_pu) result.pu = std::move(trajs[i]);
        if (kinds[i] == SchemeKind::indicator_dd) result.indicator = std::move(trajs[i]);
    }
    auto note = [&](const char* name, const Trajectory& t) {
        if (!t.ok()) result.failures.push_back(std::string(name) + ": " + *t.failure);
    };
    note("theta", result.benchmark);
    if (result.pu) note("pu", *result.pu);
    if (result.indicator) note("indicator", *result.indicator);

    const auto& bench = result.benchmark;
    const auto& mass = disc.mass;
    auto deviation = [](const Vector& a, const Vector& b) {
        Vector d(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
        return d;
    };
    // Common prefix of levels that every run reached.
    std::size_t levels = bench.levels.size();
    if (result.pu) levels = std::min(levels, result.pu->levels.size());
    if (result.indicator) levels = std::min(levels, result.indicator->levels.size());
    for (std::size_t n = 0; n < levels; ++n) {
        result.series.times.push_back(bench.times[n]);
        result.series.benchmark_norm.push_back(l2_norm(mass, bench.levels[n]));
        if (result.pu) result.series.epsilon_pu.push_back(l2_norm(mass, deviation(result.pu->levels[n], bench.levels[n])));
        if (result.indicator) {
            result.series.epsilon_indicator.push_back(
                l2_norm(mass, deviation(result.indicator->levels[n], bench.levels[n])));
        }
    }
    result.benchmark_final = disc.map.prolong(bench.final_level());
    if (result.pu) result.deviation_pu_final = disc.map.prolong(deviation(result.pu->final_level(), bench.final_level()));
    if (result.indicator) {
        result.deviation_indicator_final =
            disc.map.prolong(deviation(result.indicator->final_level(), bench.final_level()));
    }
    return result;
}

enum class SweepKind { delta_halved, grid_refined, steps_doubled };

inline SweepKind parse_sweep_kind(const std::string& s) {
    if (s == "delta") return SweepKind::delta_halved;
    if (s == "grid") return SweepKind::grid_refined;
    if (s == "steps") return SweepKind::steps_doubled;
    throw std::invalid_argument("unknown sweep '" + s + "' (expected delta, grid or steps)");
}

inline ExperimentConfig sweep_variant(const ExperimentConfig& base, SweepKind kind) {
    ExperimentConfig v = base;
    switch (kind) {
        case SweepKind::delta_halved: v.delta = base.delta / 2.0; break;
        case SweepKind::grid_refined: v.n_intervals = 2 * base.n_intervals; break;
        case SweepKind::steps_doubled: v.n_steps = 2 * base.n_steps; break;
    }
    return v;
}

struct SweepResult {
    SweepKind kind;
    ExperimentResult base;
    ExperimentResult variant;

    /// Long format: one row per time level of each case (0 = base, 1 = variant).
    output::Table table() const {
        output::Table t;
        t.header = {"case", "t", "eps1", "eps2"};
        auto add = [&](double tag, const ErrorSeries& s) {
            for (std::size_t n = 0; n < s.times.size(); ++n) {
                t.rows.push_back({tag, s.times[n], s.epsilon_pu.empty() ? std::nan("") : s.epsilon_pu[n],
                                  s.epsilon_indicator.empty() ? std::nan("") : s.epsilon_indicator[n]});
            }
        };
        add(0.0, base.series);
        add(1.0, variant.series);
        return t;
    }
};

/// Base experiment and the single-parameter variant, both DD schemes. With
/// jobs > 1 the two cases run concurrently.
inline SweepResult run_sweep(const ExperimentConfig& base, SweepKind kind) {
    ExperimentConfig b = base;
    b.schemes = {SchemeKind::factorized_pu, SchemeKind::indicator_dd};
    const ExperimentConfig v = sweep_variant(b, kind);
    if (b.jobs > 1) {
        ExperimentConfig bj = b, vj = v;
        bj.jobs = vj.jobs = std::max<std::size_t>(1, b.jobs / 2);
        auto fb = std::async(std::launch::async, [bj] { return run_base_experiment(bj); });
        auto fv = std::async(std::launch::async, [vj] { return run_base_experiment(vj); });
        return {kind, fb.get(), fv.get()};
    }
    return {kind, run_base_experiment(b), run_base_experiment(v)};
}

/// u = sin(pi x1) sin(pi x2) exp(-t), f = (2 pi^2 - 1) u.
inline double mms_exact(double x1, double x2, double t) {
    return std::sin(std::numbers::pi * x1) * std::sin(std::numbers::pi * x2) * std::exp(-t);
}

inline Coefficients mms_coefficients() {
    Coefficients c;
    c.f = [](double x1, double x2, double t) {
        return (2.0 * std::numbers::pi * std::numbers::pi - 1.0) * mms_exact(x1, x2, t);
    };
    c.source_depends_on_time = true;
    return c;
}

struct MmsLevel {
    std::size_t n_intervals;
    std::size_t n_steps;
};

struct MmsConfig {
    double sigma = 1.0;
    double final_time = 0.125;
    std::vector<MmsLevel> levels;
    CgOptions solver{1e-12, 0};
};

/// sigma = 1 with tau = h^2: n in {8, 16, 32}, T = 1/8, N = n^2 / 8.
inline MmsConfig mms_spatial_preset() { return {1.0, 0.125, {{8, 8}, {16, 32}, {32, 128}}, {1e-12, 0}}; }

/// sigma = 1/2 on a fixed fine mesh (h = 1/256) with tau halved: T = 1, N in {4, 8, 16}.
inline MmsConfig mms_temporal_preset() { return {0.5, 1.0, {{256, 4}, {256, 8}, {256, 16}}, {1e-12, 0}}; }

struct MmsRow {
    std::size_t n_intervals;
    std::size_t n_steps;
    double h;
    double tau;
    double initial_error;
    double error;
    double ratio;  ///< previous error / this error; NaN on the first row
};

inline Vector mms_interpolant(const Discretization& disc, double t) {
    Vector u(disc.unknowns());
    for (std::size_t d = 0; d < u.size(); ++d) {
        const Point& p = disc.mesh.nodes[disc.map.node(d)];
        u[d] = mms_exact(p.x1, p.x2, t);
    }
    return u;
}

/// Theta scheme against the manufactured solution; L2 error at T per level.
inline std::vector<MmsRow> mms_convergence(const MmsConfig& cfg) {
    std::vector<MmsRow> rows;
    for (const auto& level : cfg.levels) {
        const Discretization disc(level.n_intervals, mms_coefficients());
        SchemeConfig sc;
        sc.kind = SchemeKind::theta;
        sc.sigma = cfg.sigma;
        sc.final_time = cfg.final_time;
        sc.n_steps = level.n_steps;
        sc.solver = cfg.solver;
        const Trajectory traj = run(sc, disc, mms_interpolant(disc, 0.0), std::max<std::size_t>(level.n_steps, 1));
        if (!traj.ok()) throw std::runtime_error("mms_convergence: " + *traj.failure);
        const Vector exact0 = mms_interpolant(disc, 0.0);
        Vector e0 = traj.levels.front();
        for (std::size_t i = 0; i < e0.size(); ++i) e0[i] -= exact0[i];
        const double initial_error = l2_norm(disc.mass, e0);
        const Vector exact = mms_interpolant(disc, cfg.final_time);
        Vector e = traj.final_level();
        for (std::size_t i = 0; i < e.size(); ++i) e[i] -= exact[i];
        const double err = l2_norm(disc.mass, e);
        const double ratio = rows.empty() ? std::nan("") : rows.back().error / err;
        rows.push_back({level.n_intervals, level.n_steps, disc.mesh.h, sc.tau(), initial_error, err, ratio});
    }
    return rows;
}

inline output::Table mms_table(const std::vector<MmsRow>& rows) {
    output::Table t;
    t.header = {"n_intervals", "n_steps", "h", "tau", "error", "ratio"};
    for (const auto& r : rows) {
        t.rows.push_back({static_cast<double>(r.n_intervals), static_cast<double>(r.n_steps), r.h, r.tau, r.error, r.ratio});
    }
    return t;
}

inline output::Table profile_table(const DecompositionReport& report) {
    output::Table t;
    t.header = {"x1", "eta1", "eta2", "chi1", "chi2", "chi12"};
    for (const auto& r : report.profile) t.rows.push_back({r.x1, r.eta1, r.eta2, r.chi1, r.chi2, r.chi12});
    return t;
}

inline output::LinePlot profile_plot(const DecompositionReport& report, const StripDecomposition& d) {
    output::LinePlot plot{"Decomposition functions (split " + output::detail::num(d.split) + ", delta " +
                              output::detail::num(d.delta) + ")",
                          "x1", "weight", {}};
    output::LineSeries e1{"eta1", {}, {}, "#1f77b4"}, e2{"eta2", {}, {}, "#d62728"};
    output::LineSeries c1{"chi1", {}, {}, "#1f77b4", true}, c2{"chi2", {}, {}, "#d62728", true};
    for (const auto& r : report.profile) {
        for (auto* s : {&e1, &e2, &c1, &c2}) s->x.push_back(r.x1);
        e1.y.push_back(r.eta1);
        e2.y.push_back(r.eta2);
        c1.y.push_back(r.chi1);
        c2.y.push_back(r.chi2);
    }
    plot.series = {e1, e2, c1, c2};
    return plot;
}

inline output::LinePlot error_plot(const std::string& title, const ErrorSeries& s,
                                   const ErrorSeries* reference = nullptr) {
    output::LinePlot plot{title, "t", "epsilon", {}};
    if (reference) {
        if (!reference->epsilon_pu.empty())
            plot.series.push_back({"eps1 (base)", reference->times, reference->epsilon_pu, "#1f77b4", true});
        if (!reference->epsilon_indicator.empty())
            plot.series.push_back({"eps2 (base)", reference->times, reference->epsilon_indicator, "#d62728", true});
    }
    if (!s.epsilon_pu.empty()) plot.series.push_back({"eps1", s.times, s.epsilon_pu, "#1f77b4"});
    if (!s.epsilon_indicator.empty()) plot.series.push_back({"eps2", s.times, s.epsilon_indicator, "#d62728"});
    return plot;
}

}  // namespace ddparab::experiment
