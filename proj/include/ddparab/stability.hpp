#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddparab/decomposition.hpp"
#include "ddparab/dense.hpp"
#include "ddparab/fem.hpp"
#include "ddparab/time_schemes.hpp"

namespace ddparab::stability {

// Every operator here is a dense matrix in nodal coordinates on interior
// unknowns; `mass` is the lumped-mass diagonal that plays the role of the
// identity. Norms are M-weighted: ||y||_M = |M^{1/2} y|.

/// D X D^{-1} with D = diag(sqrt(mass)); the Euclidean norm of the result is
/// the M-weighted operator norm of X.
inline DenseMatrix to_weighted(const DenseMatrix& x, std::span<const double> mass) {
    DenseMatrix w = x;
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) *= std::sqrt(mass[i]) / std::sqrt(mass[j]);
    return w;
}

inline double weighted_norm(const DenseMatrix& x, std::span<const double> mass) {
    return dense_spectral_norm(to_weighted(x, mass));
}

/// M^{-1/2} K M^{-1/2}.
inline DenseMatrix symmetric_form(const DenseMatrix& k, std::span<const double> mass) {
    DenseMatrix s = k;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) /= std::sqrt(mass[i] * mass[j]);
    return s;
}

/// M + c K.
inline DenseMatrix shifted(std::span<const double> mass, double c, const DenseMatrix& k) {
    DenseMatrix b = c * k;
    for (std::size_t i = 0; i < b.rows(); ++i) b(i, i) += mass[i];
    return b;
}

inline DenseMatrix scale_rows(const DenseMatrix& x, std::span<const double> d) {
    DenseMatrix y = x;
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (double& v : y.row(i)) v *= d[i];
    return y;
}

inline std::vector<double> reciprocal(std::span<const double> d) {
    std::vector<double> r(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) r[i] = 1.0 / d[i];
    return r;
}

/// S = I - tau (M + sigma tau K)^{-1} K. sigma = 0 is allowed (explicit scheme).
inline DenseMatrix transition_theta(const DenseMatrix& k, std::span<const double> mass, double sigma, double tau) {
    DenseMatrix s = DenseMatrix::identity(k.rows());
    s -= tau * dense_solve(shifted(mass, sigma * tau, k), k);
    return s;
}

struct FactorizedTransition {
    DenseMatrix step;        ///< y^n -> y^{n+1}
    DenseMatrix transition;  ///< S acting on B2 y:  B2 y^{n+1} = S B2 y^n
    DenseMatrix first;       ///< S1 = (M + s tau K1)^{-1} (M - s tau K1)
    DenseMatrix second;      ///< S2
    double identity_deviation = 0.0;  ///< max |S - ((2s-1)/(2s) I + S1 S2 / (2s))|
};

inline FactorizedTransition transition_factorized(const DenseMatrix& k1, const DenseMatrix& k2,
                                                  std::span<const double> mass, double sigma, double tau) {
    if (!(sigma >= 0.5)) throw std::invalid_argument("transition_factorized: sigma must be >= 0.5");
    const std::size_t n = k1.rows();
    const double st = sigma * tau;
    const DenseMatrix b1 = shifted(mass, st, k1);
    const DenseMatrix b2 = shifted(mass, st, k2);
    const LuFactorization lu1(b1);
    const LuFactorization lu2(b2);

    FactorizedTransition out;
    // y+ = y - tau (M + s tau K2)^{-1} M (M + s tau K1)^{-1} (K1 + K2) y
    const DenseMatrix inner = scale_rows(lu1.solve(k1 + k2), mass);
    out.step = DenseMatrix::identity(n);
    out.step -= tau * lu2.solve(inner);
    // Operator B2 = M^{-1}(M + s tau K2) in nodal coordinates.
    const DenseMatrix b2_op = scale_rows(b2, reciprocal(mass));
    out.transition = dense_multiply(dense_multiply(b2_op, out.step), LuFactorization(b2_op).solve(DenseMatrix::identity(n)));
    out.first = lu1.solve(shifted(mass, -st, k1));
    out.second = lu2.solve(shifted(mass, -st, k2));

    DenseMatrix combo = ((2.0 * sigma - 1.0) / (2.0 * sigma)) * DenseMatrix::identity(n);
    combo += (1.0 / (2.0 * sigma)) * dense_multiply(out.first, out.second);
    out.identity_deviation = (out.transition - combo).max_abs();
    return out;
}

struct QOperator {
    DenseMatrix q;      ///< (M + tau/2 K12)^{-1} (M + s tau K2 - (s-1)/2 tau K12)
    DenseMatrix g;      ///< M + tau/2 K12
    DenseMatrix abar1;  ///< K1 - K12/2
    DenseMatrix abar2;  ///< K2 - K12/2
};

inline QOperator build_q_operator(const DenseMatrix& k1, const DenseMatrix& k2, const DenseMatrix& k12,
                                  std::span<const double> mass, double sigma, double tau) {
    QOperator out;
    out.g = shifted(mass, 0.5 * tau, k12);
    out.abar1 = k1 - 0.5 * k12;
    out.abar2 = k2 - 0.5 * k12;
    DenseMatrix numerator = shifted(mass, sigma * tau, k2);
    numerator -= (0.5 * (sigma - 1.0) * tau) * k12;
    out.q = dense_solve(out.g, numerator);
    return out;
}

struct IndicatorTransition {
    DenseMatrix stage;  ///< y^n -> auxiliary value
    DenseMatrix step;   ///< y^n -> y^{n+1}
};

/// Two-stage indicator scheme (sigma = 1), homogeneous.
inline IndicatorTransition transition_indicator(const DenseMatrix& k1, const DenseMatrix& k2, const DenseMatrix& k12,
                                                std::span<const double> mass, double tau) {
    IndicatorTransition out;
    DenseMatrix rhs1 = shifted(mass, -tau, k2);
    rhs1 += tau * k12;
    out.stage = dense_solve(shifted(mass, tau, k1), rhs1);
    DenseMatrix rhs2 = DenseMatrix::diagonal(mass);
    rhs2 -= tau * dense_multiply(k1 - k12, out.stage);
    out.step = dense_solve(shifted(mass, tau, k2), rhs2);
    return out;
}

/// Factorized scheme in the G metric with split K = Abar1 + Abar2:
///   (G + s tau Abar1) G^{-1} (G + s tau Abar2) (y+ - y)/tau + K y = 0.
inline DenseMatrix transition_indicator_transformed(const QOperator& q, double sigma, double tau) {
    const std::size_t n = q.g.rows();
    const DenseMatrix k = q.abar1 + q.abar2;
    const DenseMatrix b1 = q.g + (sigma * tau) * q.abar1;
    const DenseMatrix b2 = q.g + (sigma * tau) * q.abar2;
    const DenseMatrix inner = dense_multiply(q.g, dense_solve(b1, k));
    DenseMatrix s = DenseMatrix::identity(n);
    s -= tau * dense_solve(b2, inner);
    return s;
}

/// E with |E y| = || G^{-1/2} (G + s tau Abar2) y || in the M-weighted sense,
/// the quantity the transformed factorized scheme keeps non-increasing.
inline DenseMatrix transformed_norm_operator(const QOperator& q, std::span<const double> mass, double sigma,
                                             double tau) {
    const DenseMatrix g_sym = symmetric_form(q.g, mass);
    const DenseMatrix l = cholesky_factor(g_sym);
    // M^{-1/2} (G + s tau Abar2)
    DenseMatrix x = q.g + (sigma * tau) * q.abar2;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (double& v : x.row(i)) v /= std::sqrt(mass[i]);
    return lower_triangular_solve(l, x);
}

/// Smallest eigenvalue of M^{-1/2} K M^{-1/2} by inverse power iteration.
inline double coercivity_delta_h(const DenseMatrix& k, std::span<const double> mass, double tol = 1e-8,
                                 std::size_t max_iter = 10000) {
    const DenseMatrix a = symmetric_form(k, mass);
    const std::size_t n = a.rows();
    const LuFactorization lu(a);
    Vector v(n, 1.0);
    double vn = norm2(v);
    for (double& x : v) x /= vn;
    double estimate = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector w = lu.solve(v);
        const double wn = norm2(w);
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
        const double rayleigh = dot(v, a.apply(v));
        if (std::abs(rayleigh - estimate) <= tol * std::abs(rayleigh)) return rayleigh;
        estimate = rayleigh;
    }
    return estimate;
}

inline double largest_eigenvalue(const DenseMatrix& k, std::span<const double> mass) {
    return symmetric_eigenvalues(symmetric_form(k, mass)).back();
}

inline double smallest_eigenvalue(const DenseMatrix& k, std::span<const double> mass) {
    return symmetric_eigenvalues(symmetric_form(k, mass)).front();
}

/// One checked bound. relation "<=" means measured <= limit passes.
struct Bound {
    std::string name;
    double measured = 0.0;
    double limit = 0.0;
    std::string relation = "<=";
    bool gating = true;

    bool pass() const { return relation == "<=" ? measured <= limit : measured >= limit; }
};

enum class CertifiedScheme { theta, factorized_pu, indicator_dd, indicator_transformed };

inline std::string_view to_string(CertifiedScheme s) {
    switch (s) {
        case CertifiedScheme::theta: return "theta";
        case CertifiedScheme::factorized_pu: return "pu";
        case CertifiedScheme::indicator_dd: return "indicator";
        case CertifiedScheme::indicator_transformed: return "indicator_transformed";
    }
    return "unknown";
}

inline CertifiedScheme parse_certified_scheme(std::string_view name) {
    if (name == "theta") return CertifiedScheme::theta;
    if (name == "pu" || name == "factorized_pu") return CertifiedScheme::factorized_pu;
    if (name == "indicator" || name == "indicator_dd") return CertifiedScheme::indicator_dd;
    if (name == "indicator_transformed") return CertifiedScheme::indicator_transformed;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

struct StabilityReport {
    CertifiedScheme scheme = CertifiedScheme::theta;
    double sigma = 1.0;
    double tau = 0.0;
    std::size_t n_intervals = 0;
    std::size_t unknowns = 0;
    std::size_t trials = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    StripDecomposition decomposition;
    std::vector<Bound> bounds;

    bool passed() const {
        return std::all_of(bounds.begin(), bounds.end(), [](const Bound& b) { return !b.gating || b.pass(); });
    }

    const Bound& bound(std::string_view name) const {
        for (const auto& b : bounds)
            if (b.name == name) return b;
        throw std::out_of_range("StabilityReport: no bound named " + std::string(name));
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["scheme"] = std::string(to_string(scheme));
        j["sigma"] = sigma;
        j["tau"] = tau;
        j["mesh"] = {{"n_intervals", n_intervals}, {"unknowns", unknowns}};
        j["decomposition"] = {{"split", decomposition.split}, {"delta", decomposition.delta}};
        j["trials"] = trials;
        j["steps"] = n_steps;
        j["seed"] = seed;
        j["pass"] = passed();
        j["bounds"] = nlohmann::json::array();
        for (const auto& b : bounds) {
            j["bounds"].push_back({{"name", b.name},
                                   {"measured", b.measured},
                                   {"limit", b.limit},
                                   {"relation", b.relation},
                                   {"gating", b.gating},
                                   {"pass", b.pass()}});
        }
        return j;
    }
};

struct CertifyConfig {
    CertifiedScheme scheme = CertifiedScheme::theta;
    std::size_t n_intervals = 6;
    double sigma = 1.0;
    double tau = 1e-2;
    std::size_t n_steps = 50;
    std::size_t trials = 20;
    std::uint64_t seed = 20240101;
    StripDecomposition decomposition{0.5, 0.05};
    Coefficients coefficients;
    double norm_tol = 1e-10;
    double ratio_tol = 1e-9;
    std::size_t max_intervals = 16;
};

namespace detail {

/// Worst |W S y| / |W y| over random trajectories y^{n+1} = S y^n.
inline double worst_step_ratio(const DenseMatrix& step, const DenseMatrix& weight, std::size_t n_steps,
                               std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    const std::size_t n = step.rows();
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Vector y(n);
        for (double& v : y) v = normal(rng);
        double previous = norm2(weight.apply(y));
        for (std::size_t s = 0; s < n_steps && previous > 0.0; ++s) {
            y = step.apply(y);
            const double current = norm2(weight.apply(y));
            worst = std::max(worst, current / previous);
            previous = current;
        }
    }
    return worst;
}

inline DenseMatrix sqrt_mass_matrix(std::span<const double> mass) {
    std::vector<double> s(mass.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(mass[i]);
    return DenseMatrix::diagonal(s);
}

}  // namespace detail

/// Builds the dense operators of the requested scheme on a small mesh and
/// checks its stability bounds, including per-step monotonicity of the
/// scheme's weighted norm along homogeneous random trajectories.
inline StabilityReport certify_estimate(const CertifyConfig& cfg) {
    if (cfg.n_intervals > cfg.max_intervals) {
        throw std::length_error("certify_estimate: n_intervals " + std::to_string(cfg.n_intervals) +
                                " exceeds dense cap " + std::to_string(cfg.max_intervals));
    }
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("certify_estimate: tau must be positive");
    const Discretization disc(cfg.n_intervals, cfg.coefficients);
    const auto& mass = disc.mass.diagonal;
    const DenseMatrix k = to_dense(disc.stiffness);
    const DenseMatrix sqrt_m = detail::sqrt_mass_matrix(mass);

    StabilityReport report;
    report.scheme = cfg.scheme;
    report.sigma = cfg.sigma;
    report.tau = cfg.tau;
    report.n_intervals = cfg.n_intervals;
    report.unknowns = disc.unknowns();
    report.trials = cfg.trials;
    report.n_steps = cfg.n_steps;
    report.seed = cfg.seed;
    report.decomposition = cfg.decomposition;
    const double norm_limit = 1.0 + cfg.norm_tol;
    const double ratio_limit = 1.0 + cfg.ratio_tol;

    report.bounds.push_back({"delta_h", coercivity_delta_h(k, mass), 0.0, ">=", true});

    switch (cfg.scheme) {
        case CertifiedScheme::theta: {
            const DenseMatrix s = transition_theta(k, mass, cfg.sigma, cfg.tau);
            const bool unconditional = cfg.sigma >= 0.5;
            report.bounds.push_back({"transition_norm", weighted_norm(s, mass), norm_limit, "<=", unconditional});
            report.bounds.push_back({"per_step_ratio",
                                     detail::worst_step_ratio(s, sqrt_m, cfg.n_steps, cfg.trials, cfg.seed),
                                     ratio_limit, "<=", unconditional});
            break;
        }
        case CertifiedScheme::factorized_pu: {
            const auto eta = eta_fields(cfg.decomposition, disc.mesh);
            const DenseMatrix k1 = to_dense(assemble_stiffness(disc.mesh, disc.map, eta.eta1, cfg.coefficients));
            const DenseMatrix k2 = to_dense(assemble_stiffness(disc.mesh, disc.map, eta.eta2, cfg.coefficients));
            const auto t = transition_factorized(k1, k2, mass, cfg.sigma, cfg.tau);
            report.bounds.push_back({"kellogg_first", weighted_norm(t.first, mass), norm_limit});
            report.bounds.push_back({"kellogg_second", weighted_norm(t.second, mass), norm_limit});
            report.bounds.push_back({"convex_identity_deviation", t.identity_deviation, cfg.norm_tol});
            report.bounds.push_back({"transition_norm", weighted_norm(t.transition, mass), norm_limit});
            // ||B2 y||_M = |M^{-1/2} (M + s tau K2) y|
            DenseMatrix weight = shifted(mass, cfg.sigma * cfg.tau, k2);
            for (std::size_t i = 0; i < weight.rows(); ++i)
                for (double& v : weight.row(i)) v /= std::sqrt(mass[i]);
            report.bounds.push_back({"per_step_ratio_b2",
                                     detail::worst_step_ratio(t.step, weight, cfg.n_steps, cfg.trials, cfg.seed),
                                     ratio_limit});
            break;
        }
        case CertifiedScheme::indicator_dd:
        case CertifiedScheme::indicator_transformed: {
            const auto chi = chi_fields(cfg.decomposition, disc.mesh);
            const DenseMatrix k1 = to_dense(assemble_stiffness(disc.mesh, disc.map, chi.chi1, cfg.coefficients));
            const DenseMatrix k2 = to_dense(assemble_stiffness(disc.mesh, disc.map, chi.chi2, cfg.coefficients));
            const DenseMatrix k12 = to_dense(assemble_stiffness(disc.mesh, disc.map, chi.chi12, cfg.coefficients));
            const auto q = build_q_operator(k1, k2, k12, mass, cfg.sigma, cfg.tau);
            report.bounds.push_back({"abar_sum_deviation", (q.abar1 + q.abar2 - k).max_abs(), 1e-13});
            report.bounds.push_back({"abar1_min_eigenvalue", smallest_eigenvalue(q.abar1, mass), -cfg.norm_tol, ">="});
            report.bounds.push_back({"abar2_min_eigenvalue", smallest_eigenvalue(q.abar2, mass), -cfg.norm_tol, ">="});
            const DenseMatrix q_weight = dense_multiply(sqrt_m, q.q);
            if (cfg.scheme == CertifiedScheme::indicator_dd) {
                if (cfg.sigma != 1.0) throw std::invalid_argument("certify_estimate: indicator scheme needs sigma = 1");
                const auto t = transition_indicator(k1, k2, k12, mass, cfg.tau);
                report.bounds.push_back({"per_step_ratio_q",
                                         detail::worst_step_ratio(t.step, q_weight, cfg.n_steps, cfg.trials, cfg.seed),
                                         ratio_limit});
                // Literal stages versus the G-metric rewrite: they differ by
                // (M + tau K2)^{-1} (tau/2) K12 (stage - I).
                const DenseMatrix g_form = transition_indicator_transformed(q, 1.0, cfg.tau);
                const DenseMatrix lhs = dense_multiply(shifted(mass, cfg.tau, k2), t.step - g_form);
                const DenseMatrix rhs = (0.5 * cfg.tau) * dense_multiply(k12, t.stage - DenseMatrix::identity(k.rows()));
                report.bounds.push_back({"rewrite_discrepancy_identity", (lhs - rhs).max_abs(), cfg.norm_tol});
                report.bounds.push_back({"rewrite_operator_difference", (t.step - g_form).max_abs(), cfg.norm_tol,
                                         "<=", false});
            } else {
                if (!(cfg.sigma >= 0.5)) throw std::invalid_argument("certify_estimate: sigma must be >= 0.5");
                const DenseMatrix s = transition_indicator_transformed(q, cfg.sigma, cfg.tau);
                const DenseMatrix e = transformed_norm_operator(q, mass, cfg.sigma, cfg.tau);
                report.bounds.push_back({"per_step_ratio_transformed",
                                         detail::worst_step_ratio(s, e, cfg.n_steps, cfg.trials, cfg.seed),
                                         ratio_limit});
                report.bounds.push_back({"per_step_ratio_q",
                                         detail::worst_step_ratio(s, q_weight, cfg.n_steps, cfg.trials, cfg.seed),
                                         ratio_limit, "<=", false});
            }
            break;
        }
    }
    return report;
}

}  // namespace ddparab::stability
