// Command-line driver: reference theta scheme versus the two overlapping
// domain-decomposition schemes on the unit-square model problem.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ddparab.hpp"

namespace fs = std::filesystem;
using namespace ddparab;
using experiment::ExperimentConfig;

namespace {

struct Flags {
    std::size_t grid = 0;
    std::size_t steps = 0;
    double sigma = 1.0;
    double delta = 0.05;
    double split = 0.5;
    double final_time = 0.1;
    std::string scheme = "all";
    std::string out = "out";
    std::string config;
    double tol = 1e-10;
    std::size_t jobs = 1;
    std::uint64_t seed = 20240101;

    CLI::Option* grid_opt = nullptr;
    CLI::Option* steps_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* delta_opt = nullptr;
    CLI::Option* split_opt = nullptr;
    CLI::Option* time_opt = nullptr;
    CLI::Option* scheme_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* tol_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
    CLI::Option* seed_opt = nullptr;

    void attach(CLI::App* app) {
        grid_opt = app->add_option("--grid", grid, "Cells per axis (a 51x51 node grid is 50)");
        steps_opt = app->add_option("--steps", steps, "Number of time steps N");
        sigma_opt = app->add_option("--sigma", sigma, "Scheme weight sigma");
        delta_opt = app->add_option("--delta", delta, "Overlap half-width");
        split_opt = app->add_option("--split", split, "Interface position on x1");
        time_opt = app->add_option("--final-time", final_time, "Final time T");
        scheme_opt = app->add_option("--scheme", scheme, "theta | pu | indicator | all")
                         ->check(CLI::IsMember({"theta", "pu", "indicator", "all"}));
        out_opt = app->add_option("--out", out, "Output directory");
        app->add_option("--config", config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
        tol_opt = app->add_option("--tol", tol, "Relative CG tolerance");
        jobs_opt = app->add_option("--jobs", jobs, "Concurrent runs (1 = bitwise reproducible)")
                       ->check(CLI::PositiveNumber);
        seed_opt = app->add_option("--seed", seed, "Random seed for stability trials");
    }

    ExperimentConfig experiment_config() const {
        ExperimentConfig c;
        if (!config.empty()) c = experiment::load_config(config, c);
        if (grid_opt->count()) c.n_intervals = grid;
        if (steps_opt->count()) c.n_steps = steps;
        if (sigma_opt->count()) c.sigma = sigma;
        if (delta_opt->count()) c.delta = delta;
        if (split_opt->count()) c.split = split;
        if (time_opt->count()) c.final_time = final_time;
        if (out_opt->count()) c.output_dir = out;
        if (tol_opt->count()) c.tol = tol;
        if (jobs_opt->count()) c.jobs = jobs;
        if (seed_opt->count()) c.seed = seed;
        if (scheme_opt->count()) {
            c.schemes.clear();
            if (scheme == "pu" || scheme == "all") c.schemes.insert(SchemeKind::factorized_pu);
            if (scheme == "indicator" || scheme == "all") c.schemes.insert(SchemeKind::indicator_dd);
        }
        return c;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

output::Table field_table(const Mesh& mesh, const Vector& values) {
    output::Table t;
    t.header = {"x1", "x2", "value"};
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) t.rows.push_back({mesh.nodes[k].x1, mesh.nodes[k].x2, values[k]});
    return t;
}

void write_trajectory(const Trajectory& traj, const fs::path& base, const std::string& format) {
    if (format == "csv") {
        output::Table t;
        t.header = {"t"};
        const std::size_t n = traj.levels.empty() ? 0 : traj.levels.front().size();
        for (std::size_t i = 0; i < n; ++i) t.header.push_back("u" + std::to_string(i));
        for (std::size_t r = 0; r < traj.levels.size(); ++r) {
            std::vector<double> row{traj.times[r]};
            row.insert(row.end(), traj.levels[r].begin(), traj.levels[r].end());
            t.rows.push_back(std::move(row));
        }
        output::emit_csv(t, base.string() + ".csv");
    } else if (format == "binary") {
        // uint64 rows, uint64 cols, then row-major doubles (time excluded); host byte order.
        std::ofstream os(base.string() + ".bin", std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + base.string() + ".bin");
        const std::uint64_t rows = traj.levels.size();
        const std::uint64_t cols = traj.levels.empty() ? 0 : traj.levels.front().size();
        os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
        os.write(reinterpret_cast<const char*>(&cols), sizeof cols);
        for (const auto& level : traj.levels)
            os.write(reinterpret_cast<const char*>(level.data()), static_cast<std::streamsize>(level.size() * sizeof(double)));
    }
}

int cmd_run(const Flags& flags, const std::string& dump, bool dump_mesh) {
    const ExperimentConfig cfg = flags.experiment_config();
    const fs::path out = cfg.output_dir;
    const auto result = experiment::run_base_experiment(cfg);
    const Mesh mesh = build_unit_square_mesh(cfg.n_intervals);

    output::write_text(out / "config.json", experiment::to_json(cfg).dump(2) + "\n");
    output::emit_csv(result.series.table(), out / "fig2.csv");
    output::emit_svg(experiment::error_plot("Errors of the decomposition schemes", result.series), out / "fig2.svg");
    output::emit_csv(field_table(mesh, result.benchmark_final), out / "fig3.csv");
    output::emit_svg(output::HeatMap{"Benchmark solution at t = T", cfg.n_intervals, result.benchmark_final},
                     out / "fig3.svg");
    if (result.pu) {
        output::emit_csv(field_table(mesh, result.deviation_pu_final), out / "fig4.csv");
        output::emit_svg(output::HeatMap{"Deviation, partition-of-unity scheme", cfg.n_intervals,
                                         result.deviation_pu_final},
                         out / "fig4.svg");
    }
    if (result.indicator) {
        output::emit_csv(field_table(mesh, result.deviation_indicator_final), out / "fig5.csv");
        output::emit_svg(output::HeatMap{"Deviation, indicator-function scheme", cfg.n_intervals,
                                         result.deviation_indicator_final},
                         out / "fig5.svg");
    }
    if (dump != "none") {
        write_trajectory(result.benchmark, out / "trajectory_theta", dump);
        if (result.pu) write_trajectory(*result.pu, out / "trajectory_pu", dump);
        if (result.indicator) write_trajectory(*result.indicator, out / "trajectory_indicator", dump);
    }
    if (dump_mesh) {
        std::ofstream os(out / "mesh.txt");
        write_mesh_dump(mesh, os);
    }

    const auto& s = result.series;
    std::cout << "grid " << cfg.n_intervals + 1 << "x" << cfg.n_intervals + 1 << ", N = " << cfg.n_steps
              << ", delta = " << cfg.delta << "\n";
    if (!s.times.empty()) {
        std::cout << "  ||y_bar(T)||   = " << fmt(s.benchmark_norm.back()) << "\n";
        if (!s.epsilon_pu.empty()) std::cout << "  eps1(T) (pu)   = " << fmt(s.epsilon_pu.back()) << "\n";
        if (!s.epsilon_indicator.empty()) std::cout << "  eps2(T) (ind)  = " << fmt(s.epsilon_indicator.back()) << "\n";
    }
    for (const auto& f : result.failures) std::cerr << "failure: " << f << "\n";
    std::cout << "wrote " << out.string() << "\n";
    return result.ok() ? 0 : 1;
}

int cmd_sweep(const Flags& flags, const std::string& vary) {
    const ExperimentConfig cfg = flags.experiment_config();
    const auto kind = experiment::parse_sweep_kind(vary);
    const auto sweep = experiment::run_sweep(cfg, kind);
    const char* fig = kind == experiment::SweepKind::delta_halved   ? "fig6"
                      : kind == experiment::SweepKind::grid_refined ? "fig7"
                                                                    : "fig8";
    const fs::path out = cfg.output_dir;
    output::emit_csv(sweep.table(), out / (std::string(fig) + ".csv"));
    const auto& v = sweep.variant.config;
    const std::string title = "Errors: grid " + std::to_string(v.n_intervals + 1) + ", N = " +
                              std::to_string(v.n_steps) + ", delta = " + output::detail::num(v.delta) +
                              " (dashed: base)";
    output::emit_svg(experiment::error_plot(title, sweep.variant.series, &sweep.base.series),
                     out / (std::string(fig) + ".svg"));
    auto line = [](const char* name, const experiment::ExperimentResult& r) {
        std::cout << "  " << name << ": eps1(T) = " << fmt(r.series.epsilon_pu.back())
                  << ", eps2(T) = " << fmt(r.series.epsilon_indicator.back()) << "\n";
    };
    std::cout << "sweep " << vary << "\n";
    line("base   ", sweep.base);
    line("variant", sweep.variant);
    for (const auto* r : {&sweep.base, &sweep.variant})
        for (const auto& f : r->failures) std::cerr << "failure: " << f << "\n";
    std::cout << "wrote " << (out / (std::string(fig) + ".csv")).string() << "\n";
    return sweep.base.ok() && sweep.variant.ok() ? 0 : 1;
}

int cmd_profiles(const Flags& flags) {
    const ExperimentConfig cfg = flags.experiment_config();
    const Mesh mesh = build_unit_square_mesh(cfg.n_intervals);
    const auto decomp = cfg.decomposition();
    const auto report = decomposition_report(decomp, mesh);
    const fs::path out = cfg.output_dir;
    output::emit_csv(experiment::profile_table(report), out / "fig1.csv");
    output::emit_svg(experiment::profile_plot(report, decomp), out / "fig1.svg");
    std::cout << "elements: subdomain1 " << report.elements_subdomain1 << ", subdomain2 " << report.elements_subdomain2
              << ", overlap " << report.elements_overlap << " (" << report.overlap_cell_columns
              << " cell columns, fraction " << report.overlap_fraction << ")\n";
    return 0;
}

int cmd_stability(const Flags& flags, const std::vector<double>& taus, std::size_t trials) {
    using namespace ddparab::stability;
    const ExperimentConfig cfg = flags.experiment_config();
    const std::vector<std::size_t> grids = flags.grid_opt->count() ? std::vector<std::size_t>{flags.grid}
                                                                   : std::vector<std::size_t>{4, 8, 16};
    const std::vector<double> sigmas = flags.sigma_opt->count() ? std::vector<double>{flags.sigma}
                                                                : std::vector<double>{0.5, 0.75, 1.0};
    std::vector<CertifiedScheme> schemes;
    if (flags.scheme == "theta" || flags.scheme == "all") schemes.push_back(CertifiedScheme::theta);
    if (flags.scheme == "pu" || flags.scheme == "all") schemes.push_back(CertifiedScheme::factorized_pu);
    if (flags.scheme == "indicator" || flags.scheme == "all") {
        schemes.push_back(CertifiedScheme::indicator_dd);
        schemes.push_back(CertifiedScheme::indicator_transformed);
    }
    nlohmann::json reports = nlohmann::json::array();
    bool all_pass = true;
    for (auto scheme : schemes) {
        for (std::size_t grid : grids) {
            for (double sigma : sigmas) {
                if (scheme == CertifiedScheme::indicator_dd && sigma != 1.0) continue;
                for (double tau : taus) {
                    CertifyConfig cc;
                    cc.scheme = scheme;
                    cc.n_intervals = grid;
                    cc.sigma = sigma;
                    cc.tau = tau;
                    cc.n_steps = flags.steps_opt->count() ? flags.steps : 50;
                    cc.trials = trials;
                    cc.seed = cfg.seed;
                    cc.decomposition = cfg.decomposition();
                    const auto report = certify_estimate(cc);
                    all_pass = all_pass && report.passed();
                    reports.push_back(report.to_json());
                    std::cout << (report.passed() ? "PASS " : "FAIL ") << to_string(scheme) << " n=" << grid
                              << " sigma=" << sigma << " tau=" << tau;
                    for (const auto& b : report.bounds) {
                        std::cout << "  " << b.name << '=' << fmt(b.measured) << (b.gating ? "" : "*");
                    }
                    std::cout << "\n";
                }
            }
        }
    }
    output::write_text(fs::path(cfg.output_dir) / "stability.json", reports.dump(2) + "\n");
    std::cout << "(* informational, not gating)\nwrote " << (fs::path(cfg.output_dir) / "stability.json").string()
              << "\n";
    return all_pass ? 0 : 1;
}

int cmd_mms(const Flags& flags, const std::string& preset) {
    const ExperimentConfig cfg = flags.experiment_config();
    const fs::path out = cfg.output_dir;
    auto report = [&](const char* name, const experiment::MmsConfig& mc) {
        const auto rows = experiment::mms_convergence(mc);
        output::emit_csv(experiment::mms_table(rows), out / (std::string("mms_") + name + ".csv"));
        std::cout << name << " (sigma = " << mc.sigma << ")\n";
        for (const auto& r : rows) {
            std::cout << "  n=" << r.n_intervals << " N=" << r.n_steps << " error=" << fmt(r.error)
                      << " ratio=" << (std::isnan(r.ratio) ? std::string("-") : fmt(r.ratio)) << "\n";
        }
    };
    if (preset == "spatial" || preset == "both") report("spatial", experiment::mms_spatial_preset());
    if (preset == "temporal" || preset == "both") report("temporal", experiment::mms_temporal_preset());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overlapping domain-decomposition schemes for parabolic problems"};
    app.require_subcommand(1);

    Flags run_flags, sweep_flags, stab_flags, mms_flags, prof_flags;
    std::string dump = "none";
    bool dump_mesh = false;
    auto* run = app.add_subcommand("run", "Benchmark vs. both decomposition schemes (fig2-fig5)");
    run_flags.attach(run);
    run->add_option("--dump-trajectory", dump, "none | csv | binary")->check(CLI::IsMember({"none", "csv", "binary"}));
    run->add_flag("--dump-mesh", dump_mesh, "Write mesh.txt");

    std::string vary;
    auto* sweep = app.add_subcommand("sweep", "One-parameter variant of the base run (fig6-fig8)");
    sweep_flags.attach(sweep);
    sweep->add_option("--vary", vary, "delta | grid | steps")->required()->check(CLI::IsMember({"delta", "grid", "steps"}));

    std::vector<double> taus{1e-3, 1e-2, 1e-1, 1.0};
    std::size_t trials = 20;
    auto* stab = app.add_subcommand("stability", "Dense stability certification on small meshes");
    stab_flags.attach(stab);
    stab->add_option("--tau", taus, "Time steps to test");
    stab->add_option("--trials", trials, "Random homogeneous trajectories per configuration");

    std::string preset = "both";
    auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence of the theta scheme");
    mms_flags.attach(mms);
    mms->add_option("--preset", preset, "spatial | temporal | both")->check(CLI::IsMember({"spatial", "temporal", "both"}));

    auto* prof = app.add_subcommand("profiles", "Decomposition function profiles (fig1)");
    prof_flags.attach(prof);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(run_flags, dump, dump_mesh);
        if (*sweep) return cmd_sweep(sweep_flags, vary);
        if (*stab) return cmd_stability(stab_flags, taus, trials);
        if (*mms) return cmd_mms(mms_flags, preset);
        if (*prof) return cmd_profiles(prof_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
