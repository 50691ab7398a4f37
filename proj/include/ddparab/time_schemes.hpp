#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ddparab/decomposition.hpp"
#include "ddparab/fem.hpp"
#include "ddparab/mesh.hpp"
#include "ddparab/sparse.hpp"

namespace ddparab {

enum class SchemeKind { theta, factorized_pu, indicator_dd };

inline std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::theta: return "theta";
        case SchemeKind::factorized_pu: return "pu";
        case SchemeKind::indicator_dd: return "indicator";
    }
    return "unknown";
}

inline SchemeKind parse_scheme_kind(std::string_view name) {
    if (name == "theta") return SchemeKind::theta;
    if (name == "pu" || name == "factorized_pu") return SchemeKind::factorized_pu;
    if (name == "indicator" || name == "indicator_dd") return SchemeKind::indicator_dd;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

struct SchemeConfig {
    SchemeKind kind = SchemeKind::theta;
    double sigma = 1.0;
    double final_time = 0.1;
    std::size_t n_steps = 50;
    std::optional<StripDecomposition> decomposition;
    CgOptions solver;

    double tau() const { return n_steps == 0 ? 0.0 : final_time / static_cast<double>(n_steps); }

    void validate() const {
        if (!(sigma > 0.0 && sigma <= 1.0)) throw std::invalid_argument("SchemeConfig: sigma must lie in (0, 1]");
        if (!(final_time >= 0.0)) throw std::invalid_argument("SchemeConfig: final time must be >= 0");
        if (kind != SchemeKind::theta) {
            if (!decomposition) throw std::invalid_argument("SchemeConfig: domain decomposition schemes need a decomposition");
            decomposition->validate();
        }
        // The two-stage indicator scheme has no free weight: its stages are the sigma = 1 form.
        if (kind == SchemeKind::indicator_dd && sigma != 1.0) {
            throw std::invalid_argument("SchemeConfig: the indicator scheme is implemented for sigma = 1 only");
        }
    }
};

/// Mesh, interior numbering, lumped mass and unweighted stiffness of one problem.
struct Discretization {
    Mesh mesh;
    InteriorIndexMap map;
    LumpedMass mass;
    SparseMatrix stiffness;
    Coefficients coefficients;

    Discretization(std::size_t n_intervals, Coefficients coeff)
        : mesh(build_unit_square_mesh(n_intervals)),
          map(mesh),
          mass(interior_lumped_mass(mesh, map)),
          stiffness(assemble_stiffness(mesh, map, WeightField::unit(mesh), coeff)),
          coefficients(std::move(coeff)) {}

    std::size_t unknowns() const { return map.size(); }
    Vector load(double t) const { return assemble_load(mesh, map, coefficients, t); }
};

/// Operators one scheme needs. For the partition-of-unity scheme first/second
/// are K(eta1), K(eta2) and overlap is empty; for the indicator scheme they are
/// K(chi1), K(chi2), K(chi12).
struct SchemeOperators {
    LumpedMass mass;
    SparseMatrix stiffness;
    SparseMatrix first;
    SparseMatrix second;
    SparseMatrix overlap;
};

inline SchemeOperators build_scheme_operators(const Discretization& disc, SchemeKind kind,
                                              const std::optional<StripDecomposition>& decomposition) {
    SchemeOperators ops{disc.mass, disc.stiffness, {}, {}, {}};
    const std::size_t n = disc.unknowns();
    auto zero = [n] { return csr_from_triplets(n, n, std::span<const Triplet>{}); };
    switch (kind) {
        case SchemeKind::theta:
            ops.first = zero();
            ops.second = zero();
            ops.overlap = zero();
            break;
        case SchemeKind::factorized_pu: {
            if (!decomposition) throw std::invalid_argument("build_scheme_operators: missing decomposition");
            const auto eta = eta_fields(*decomposition, disc.mesh);
            ops.first = assemble_stiffness(disc.mesh, disc.map, eta.eta1, disc.coefficients);
            ops.second = assemble_stiffness(disc.mesh, disc.map, eta.eta2, disc.coefficients);
            ops.overlap = zero();
            break;
        }
        case SchemeKind::indicator_dd: {
            if (!decomposition) throw std::invalid_argument("build_scheme_operators: missing decomposition");
            const auto chi = chi_fields(*decomposition, disc.mesh);
            ops.first = assemble_stiffness(disc.mesh, disc.map, chi.chi1, disc.coefficients);
            ops.second = assemble_stiffness(disc.mesh, disc.map, chi.chi2, disc.coefficients);
            ops.overlap = assemble_stiffness(disc.mesh, disc.map, chi.chi12, disc.coefficients);
            break;
        }
    }
    return ops;
}

/// A step failed; carries the index n of the level being advanced from.
class StepError : public std::runtime_error {
public:
    StepError(std::size_t step, const std::string& what)
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

struct IndicatorStages {
    Vector intermediate;  ///< auxiliary value after the subdomain-1 solve
    Vector next;
};

/// One-step advance for a fixed scheme. System matrices are assembled once
/// at construction; every step is a fixed number of CG solves.
class SchemeStepper {
public:
    SchemeStepper(const SchemeOperators& ops, SchemeConfig config) : ops_(&ops), config_(std::move(config)) {
        config_.validate();
        const double tau = config_.tau();
        const double st = config_.sigma * tau;
        const auto& m = ops.mass.diagonal;
        switch (config_.kind) {
            case SchemeKind::theta:
                system_first_ = ops.stiffness.scaled(st).add_diagonal(m);
                break;
            case SchemeKind::factorized_pu:
            case SchemeKind::indicator_dd:
                system_first_ = ops.first.scaled(st).add_diagonal(m);
                system_second_ = ops.second.scaled(st).add_diagonal(m);
                break;
        }
    }

    const SchemeConfig& config() const { return config_; }

    Vector step(std::span<const double> y, std::span<const double> load) const {
        switch (config_.kind) {
            case SchemeKind::theta: return theta(y, load);
            case SchemeKind::factorized_pu: return factorized(y, load);
            case SchemeKind::indicator_dd: return indicator(y, load).next;
        }
        throw std::logic_error("SchemeStepper: unknown scheme");
    }

    /// (M + s tau K) y+ = (M - (1 - s) tau K) y + tau F.
    Vector theta(std::span<const double> y, std::span<const double> load) const {
        require(SchemeKind::theta, y, load);
        const double tau = config_.tau();
        const auto& m = ops_->mass.diagonal;
        const Vector ky = matvec(ops_->stiffness, y);
        Vector rhs(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            rhs[i] = m[i] * y[i] - (1.0 - config_.sigma) * tau * ky[i] + tau * load[i];
        }
        return solve_spd(system_first_, rhs, config_.solver, y);
    }

    /// B1 M^{-1} B2 (y+ - y) / tau + (K1 + K2) y = F with B_a = M + s tau K_a,
    /// sequenced as  B1 z = F - (K1 + K2) y,  B2 w = M z,  y+ = y + tau w.
    Vector factorized(std::span<const double> y, std::span<const double> load) const {
        require(SchemeKind::factorized_pu, y, load);
        const auto& m = ops_->mass.diagonal;
        const Vector k1y = matvec(ops_->first, y);
        const Vector k2y = matvec(ops_->second, y);
        Vector r(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) r[i] = load[i] - k1y[i] - k2y[i];
        Vector z = solve_spd(system_first_, r, config_.solver);
        for (std::size_t i = 0; i < y.size(); ++i) z[i] *= m[i];
        const Vector w = solve_spd(system_second_, z, config_.solver);
        Vector next(y.begin(), y.end());
        const double tau = config_.tau();
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += tau * w[i];
        return next;
    }

    /// Auxiliary-value form of the sigma = 1 factorized scheme:
    ///   (M + tau K1) y~ = M y + tau (F - K2 y),
    ///   (M + tau K2) y+ = M y + tau (F - K1 y~).
    Vector factorized_auxiliary(std::span<const double> y, std::span<const double> load) const {
        require(SchemeKind::factorized_pu, y, load);
        if (config_.sigma != 1.0) throw std::invalid_argument("factorized_auxiliary: defined for sigma = 1");
        const double tau = config_.tau();
        const auto& m = ops_->mass.diagonal;
        const Vector k2y = matvec(ops_->second, y);
        Vector rhs(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) rhs[i] = m[i] * y[i] + tau * (load[i] - k2y[i]);
        const Vector aux = solve_spd(system_first_, rhs, config_.solver, y);
        const Vector k1a = matvec(ops_->first, aux);
        for (std::size_t i = 0; i < y.size(); ++i) rhs[i] = m[i] * y[i] + tau * (load[i] - k1a[i]);
        return solve_spd(system_second_, rhs, config_.solver, aux);
    }

    ///   (M + tau K1) y~ = M y + tau (F - K2 y + K12 y),
    ///   (M + tau K2) y+ = M y + tau (F - K1 y~ + K12 y~).
    IndicatorStages indicator(std::span<const double> y, std::span<const double> load) const {
        require(SchemeKind::indicator_dd, y, load);
        const double tau = config_.tau();
        const auto& m = ops_->mass.diagonal;
        const Vector k2y = matvec(ops_->second, y);
        const Vector k12y = matvec(ops_->overlap, y);
        Vector rhs(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) rhs[i] = m[i] * y[i] + tau * (load[i] - k2y[i] + k12y[i]);
        IndicatorStages out;
        out.intermediate = solve_spd(system_first_, rhs, config_.solver, y);
        const Vector k1a = matvec(ops_->first, out.intermediate);
        const Vector k12a = matvec(ops_->overlap, out.intermediate);
        for (std::size_t i = 0; i < y.size(); ++i) rhs[i] = m[i] * y[i] + tau * (load[i] - k1a[i] + k12a[i]);
        out.next = solve_spd(system_second_, rhs, config_.solver, out.intermediate);
        return out;
    }

private:
    void require(SchemeKind kind, std::span<const double> y, std::span<const double> load) const {
        if (config_.kind != kind) throw std::invalid_argument("SchemeStepper: scheme kind mismatch");
        const std::size_t n = ops_->mass.size();
        if (y.size() != n || load.size() != n) throw std::invalid_argument("SchemeStepper: dimension mismatch");
    }

    const SchemeOperators* ops_;
    SchemeConfig config_;
    SparseMatrix system_first_;
    SparseMatrix system_second_;
};

inline Vector theta_step(const SchemeOperators& ops, const SchemeConfig& config, std::span<const double> y,
                         std::span<const double> load) {
    return SchemeStepper(ops, config).theta(y, load);
}

inline Vector factorized_pu_step(const SchemeOperators& ops, const SchemeConfig& config, std::span<const double> y,
                                 std::span<const double> load) {
    return SchemeStepper(ops, config).factorized(y, load);
}

inline IndicatorStages indicator_dd_step(const SchemeOperators& ops, const SchemeConfig& config,
                                         std::span<const double> y, std::span<const double> load) {
    return SchemeStepper(ops, config).indicator(y, load);
}

struct Trajectory {
    std::vector<std::size_t> step_indices;
    std::vector<double> times;
    std::vector<Vector> levels;
    /// Set when a step failed; levels then hold everything computed before it.
    std::optional<std::string> failure;

    bool ok() const { return !failure.has_value(); }
    const Vector& final_level() const { return levels.back(); }
};

/// Source term as a function of time, returning interior load vectors.
using LoadFunction = std::function<Vector(double)>;

/// Advances y0 through n_steps levels; keeps every `stride`-th level plus the last.
inline Trajectory run(const SchemeConfig& config, const SchemeOperators& ops, const LoadFunction& load, Vector y0,
                      std::size_t stride = 1,
                      const std::function<void(std::size_t, std::span<const double>)>& observer = {}) {
    if (stride == 0) stride = 1;
    if (y0.size() != ops.mass.size()) throw std::invalid_argument("run: initial vector has wrong size");
    const SchemeStepper stepper(ops, config);
    const double tau = config.tau();
    Trajectory traj;
    auto keep = [&](std::size_t n, const Vector& y) {
        traj.step_indices.push_back(n);
        traj.times.push_back(static_cast<double>(n) * tau);
        traj.levels.push_back(y);
    };
    keep(0, y0);
    if (observer) observer(0, y0);
    Vector y = std::move(y0);
    for (std::size_t n = 0; n < config.n_steps; ++n) {
        try {
            const Vector f = load(static_cast<double>(n) * tau + config.sigma * tau);
            y = stepper.step(y, f);
        } catch (const std::exception& e) {
            traj.failure = StepError(n, e.what()).what();
            if (traj.step_indices.back() != n) keep(n, y);
            return traj;
        }
        if (observer) observer(n + 1, y);
        if ((n + 1) % stride == 0 || n + 1 == config.n_steps) keep(n + 1, y);
    }
    return traj;
}

inline LoadFunction make_load_function(const Discretization& disc) {
    if (!disc.coefficients.source_depends_on_time) {
        Vector f = disc.load(0.0);
        return [f = std::move(f)](double) { return f; };
    }
    return [&disc](double t) { return disc.load(t); };
}

/// Convenience overload: operators and load assembled from the discretization.
inline Trajectory run(const SchemeConfig& config, const Discretization& disc, Vector y0, std::size_t stride = 1) {
    config.validate();
    const SchemeOperators ops = build_scheme_operators(disc, config.kind, config.decomposition);
    return run(config, ops, make_load_function(disc), std::move(y0), stride);
}

}  // namespace ddparab
