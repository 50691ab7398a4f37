#include <gtest/gtest.h>

#include <numbers>

#include "oracle.hpp"

using namespace ddparab;
using namespace ddparab::stability;

namespace {

struct Small {
    Discretization disc;
    DenseMatrix k, k1, k2, k12, eta1, eta2;
    const std::vector<double>& mass() const { return disc.mass.diagonal; }

    Small(std::size_t n, StripDecomposition d = {}) : disc(n, Coefficients{}) {
        k = to_dense(disc.stiffness);
        const auto chi = chi_fields(d, disc.mesh);
        const auto eta = eta_fields(d, disc.mesh);
        k1 = to_dense(assemble_stiffness(disc.mesh, disc.map, chi.chi1));
        k2 = to_dense(assemble_stiffness(disc.mesh, disc.map, chi.chi2));
        k12 = to_dense(assemble_stiffness(disc.mesh, disc.map, chi.chi12));
        eta1 = to_dense(assemble_stiffness(disc.mesh, disc.map, eta.eta1));
        eta2 = to_dense(assemble_stiffness(disc.mesh, disc.map, eta.eta2));
    }
};

CertifyConfig certify(CertifiedScheme s, std::size_t n, double sigma, double tau) {
    CertifyConfig c;
    c.scheme = s;
    c.n_intervals = n;
    c.sigma = sigma;
    c.tau = tau;
    return c;
}

}  // namespace

TEST(ThetaTransition, ZeroOperatorIsIdentity) {
    const std::vector<double> m{0.5, 2.0, 1.0};
    const DenseMatrix s = transition_theta(DenseMatrix(3, 3), m, 1.0, 0.3);
    EXPECT_EQ(s.data(), DenseMatrix::identity(3).data());
    EXPECT_NEAR(weighted_norm(s, m), 1.0, 1e-15);
}

TEST(ThetaTransition, ScalarCrankNicolsonVanishes) {
    const std::vector<double> m{1.0};
    const std::vector<double> lam{4.0};
    const DenseMatrix s = transition_theta(DenseMatrix::diagonal(lam), m, 0.5, 0.5);
    EXPECT_NEAR(s(0, 0), 0.0, 1e-15);
}

TEST(ThetaTransition, NormBoundedAndMatchesOracle) {
    const Small s(6);
    for (double tau : {1e-3, 1e-2, 1e-1, 1.0}) {
        const DenseMatrix t = transition_theta(s.k, s.mass(), 0.5, tau);
        const Eigen::MatrixXd m = oracle::diag(s.mass()), k = oracle::eig(s.k);
        const Eigen::MatrixXd ref = Eigen::MatrixXd::Identity(k.rows(), k.cols()) - tau * (m + 0.5 * tau * k).lu().solve(k);
        EXPECT_LE((oracle::eig(t) - ref).cwiseAbs().maxCoeff(), 1e-12);
        const double norm = weighted_norm(t, s.mass());
        EXPECT_NEAR(norm, oracle::weighted_norm(ref, s.mass()), 1e-10);
        EXPECT_LE(norm, 1.0 + 1e-10);
    }
}

TEST(FactorizedTransition, TrivialCases) {
    const std::vector<double> m{1.0, 0.25};
    const auto t = transition_factorized(DenseMatrix(2, 2), DenseMatrix(2, 2), m, 1.0, 0.1);
    EXPECT_LE((t.transition - DenseMatrix::identity(2)).max_abs(), 1e-15);
    EXPECT_LE((t.first - DenseMatrix::identity(2)).max_abs(), 1e-15);
    EXPECT_THROW(transition_factorized(DenseMatrix(2, 2), DenseMatrix(2, 2), m, 0.4, 0.1), std::invalid_argument);

    const Small s(6);
    const auto pr = transition_factorized(s.eta1, s.eta2, s.mass(), 0.5, 0.05);
    EXPECT_LE((pr.transition - dense_multiply(pr.first, pr.second)).max_abs(), 1e-10);
}

TEST(FactorizedTransition, KelloggBoundsAndIdentity) {
    const Small s(6);
    for (double sigma : {0.5, 0.75, 1.0}) {
        for (double tau : {0.002, 0.1, 1.0}) {
            const auto t = transition_factorized(s.eta1, s.eta2, s.mass(), sigma, tau);
            EXPECT_LE(weighted_norm(t.first, s.mass()), 1.0 + 1e-10);
            EXPECT_LE(weighted_norm(t.second, s.mass()), 1.0 + 1e-10);
            EXPECT_LE(weighted_norm(t.transition, s.mass()), 1.0 + 1e-10);
            EXPECT_LE(t.identity_deviation, 1e-10);
        }
    }
}

TEST(FactorizedTransition, StepMatchesOracle) {
    const Small s(5);
    const double sigma = 0.75, tau = 0.05;
    const auto t = transition_factorized(s.eta1, s.eta2, s.mass(), sigma, tau);
    const Eigen::MatrixXd m = oracle::diag(s.mass());
    const Eigen::MatrixXd b1 = m + sigma * tau * oracle::eig(s.eta1), b2 = m + sigma * tau * oracle::eig(s.eta2);
    const Eigen::MatrixXd op = b1 * m.inverse() * b2;
    const Eigen::MatrixXd ref = Eigen::MatrixXd::Identity(m.rows(), m.cols()) - tau * op.lu().solve(oracle::eig(s.k));
    EXPECT_LE((oracle::eig(t.step) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(QOperator, OverlapFreeReducesToB2) {
    const Small s(6, {0.5, 0.0});
    EXPECT_EQ(s.k12.max_abs(), 0.0);
    const auto q = build_q_operator(s.k1, s.k2, s.k12, s.mass(), 1.0, 0.1);
    const Eigen::MatrixXd ref = oracle::diag(s.mass()).inverse() * (oracle::diag(s.mass()) + 0.1 * oracle::eig(s.k2));
    EXPECT_LE((oracle::eig(q.q) - ref).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(QOperator, AbarSplitting) {
    for (std::size_t n : {6u, 10u}) {
        const Small s(n);
        const auto q = build_q_operator(s.k1, s.k2, s.k12, s.mass(), 1.0, 0.1);
        EXPECT_LE((q.abar1 + q.abar2 - s.k).max_abs(), 1e-13);
        for (const auto* a : {&q.abar1, &q.abar2}) {
            const double ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(oracle::eig(*a)).eigenvalues().minCoeff();
            EXPECT_GE(ev, -1e-10);
            EXPECT_GE(smallest_eigenvalue(*a, s.mass()), -1e-10);
        }
    }
}

TEST(IndicatorTransition, MatchesOracle) {
    const Small s(10);
    const double tau = 0.05;
    const auto t = transition_indicator(s.k1, s.k2, s.k12, s.mass(), tau);
    const Eigen::MatrixXd m = oracle::diag(s.mass()), k1 = oracle::eig(s.k1), k2 = oracle::eig(s.k2),
                          k12 = oracle::eig(s.k12);
    const Eigen::MatrixXd stage = (m + tau * k1).lu().solve(m - tau * k2 + tau * k12);
    const Eigen::MatrixXd step = (m + tau * k2).lu().solve(m - tau * (k1 - k12) * stage);
    EXPECT_LE((oracle::eig(t.stage) - stage).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((oracle::eig(t.step) - step).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(IndicatorTransition, RewriteDiffersOnlyThroughOverlap) {
    // Without overlap elements the literal stages and the G-metric rewrite agree.
    const Small none(6, {0.5, 0.0});
    const auto q0 = build_q_operator(none.k1, none.k2, none.k12, none.mass(), 1.0, 0.1);
    const auto t0 = transition_indicator(none.k1, none.k2, none.k12, none.mass(), 0.1);
    EXPECT_LE((t0.step - transition_indicator_transformed(q0, 1.0, 0.1)).max_abs(), 1e-12);
    // With overlap they differ by exactly (M + tau K2)^{-1} (tau/2) K12 (stage - I).
    const Small s(10);
    const auto q = build_q_operator(s.k1, s.k2, s.k12, s.mass(), 1.0, 0.1);
    const auto t = transition_indicator(s.k1, s.k2, s.k12, s.mass(), 0.1);
    const DenseMatrix diff = t.step - transition_indicator_transformed(q, 1.0, 0.1);
    EXPECT_GT(diff.max_abs(), 1e-6);
    const Eigen::MatrixXd lhs = (oracle::diag(s.mass()) + 0.1 * oracle::eig(s.k2)) * oracle::eig(diff);
    const Eigen::MatrixXd rhs = 0.05 * oracle::eig(s.k12) * (oracle::eig(t.stage) - Eigen::MatrixXd::Identity(lhs.rows(), lhs.cols()));
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Coercivity, MassGivesOne) {
    const Small s(5);
    EXPECT_NEAR(coercivity_delta_h(DenseMatrix::diagonal(s.mass()), s.mass()), 1.0, 1e-8);
}

TEST(Coercivity, LumpedApproachesContinuumFromBelow) {
    // With lumped mass the operator is the 5-point difference Laplacian, whose
    // smallest eigenvalue is 8 n^2 sin^2(pi / 2n) < 2 pi^2.
    const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
    double previous = 0.0;
    for (std::size_t n : {4u, 8u, 16u}) {
        const Small s(n);
        const double d = coercivity_delta_h(s.k, s.mass());
        const double closed = 8.0 * n * n * std::pow(std::sin(std::numbers::pi / (2.0 * n)), 2);
        EXPECT_NEAR(d, closed, 1e-7 * closed);
        EXPECT_LT(d, exact);
        EXPECT_GT(d, previous);
        previous = d;
        if (n == 16) EXPECT_NEAR(d, exact, 0.05 * exact);
    }
}

TEST(Coercivity, ConsistentMassApproachesFromAbove) {
    // Galerkin (Rayleigh-Ritz) eigenvalues with the consistent mass are upper bounds.
    const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t n : {4u, 8u, 16u}) {
        const Small s(n);
        const Eigen::MatrixXd m = oracle::eig(assemble_mass(s.disc.mesh, s.disc.map));
        const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(oracle::eig(s.k), m);
        const double d = ges.eigenvalues().minCoeff();
        EXPECT_GT(d, exact);
        EXPECT_LT(d, previous);
        previous = d;
    }
}

TEST(Coercivity, ReactionShift) {
    Coefficients c;
    c.c = [](double, double) { return 10.0; };
    const Discretization plain(8, Coefficients{}), shifted_disc(8, c);
    const double a = coercivity_delta_h(to_dense(plain.stiffness), plain.mass.diagonal);
    const double b = coercivity_delta_h(to_dense(shifted_disc.stiffness), shifted_disc.mass.diagonal);
    EXPECT_NEAR(b - a, 10.0, 1e-6);
}

TEST(Certify, ThetaImplicitPasses) {
    const auto r = certify_estimate(certify(CertifiedScheme::theta, 6, 1.0, 0.1));
    EXPECT_TRUE(r.passed());
    EXPECT_LE(r.bound("per_step_ratio").measured, 1.0);
    EXPECT_GT(r.bound("delta_h").measured, 0.0);
}

TEST(Certify, ExplicitNegativeControlFails) {
    const Small s(6);
    const double lmax = largest_eigenvalue(s.k, s.mass());
    auto cfg = certify(CertifiedScheme::theta, 6, 0.0, 1.5 * 2.0 / lmax);
    cfg.n_steps = 10;
    const auto r = certify_estimate(cfg);
    EXPECT_GT(r.bound("per_step_ratio").measured, 1.0 + 1e-9);
    EXPECT_FALSE(r.bound("per_step_ratio").pass());
    EXPECT_GT(r.bound("transition_norm").measured, 1.0);
}

TEST(Certify, FactorizedPasses) {
    for (double sigma : {0.5, 0.75, 1.0}) {
        const auto r = certify_estimate(certify(CertifiedScheme::factorized_pu, 6, sigma, 0.002));
        EXPECT_TRUE(r.passed()) << r.to_json().dump();
    }
}

TEST(Certify, IndicatorPassesAcrossTau) {
    for (std::size_t n : {6u, 10u}) {
        for (double tau : {1e-3, 1e-2, 1e-1, 1.0}) {
            const auto r = certify_estimate(certify(CertifiedScheme::indicator_dd, n, 1.0, tau));
            EXPECT_TRUE(r.passed()) << r.to_json().dump();
            EXPECT_LE(r.bound("per_step_ratio_q").measured, 1.0 + 1e-9);
        }
    }
    EXPECT_THROW(certify_estimate(certify(CertifiedScheme::indicator_dd, 6, 0.5, 0.1)), std::invalid_argument);
}

TEST(Certify, TransformedSchemeCorrectedNorm) {
    for (double sigma : {0.5, 0.75, 1.0}) {
        for (double tau : {1e-2, 1.0}) {
            const auto r = certify_estimate(certify(CertifiedScheme::indicator_transformed, 10, sigma, tau));
            EXPECT_TRUE(r.passed()) << r.to_json().dump();
            EXPECT_FALSE(r.bound("per_step_ratio_q").gating);
        }
    }
}

TEST(Certify, DenseCapAndJson) {
    EXPECT_THROW(certify_estimate(certify(CertifiedScheme::theta, 17, 1.0, 0.1)), std::length_error);
    const auto r = certify_estimate(certify(CertifiedScheme::theta, 4, 0.75, 0.01));
    const auto j = r.to_json();
    EXPECT_EQ(j["scheme"], "theta");
    EXPECT_EQ(j["mesh"]["n_intervals"], 4);
    EXPECT_EQ(j["seed"], r.seed);
    ASSERT_TRUE(j["bounds"].is_array());
    for (const auto& b : j["bounds"]) {
        EXPECT_TRUE(b.contains("name") && b.contains("measured") && b.contains("limit") && b.contains("pass"));
        EXPECT_TRUE(std::isfinite(b["measured"].get<double>()));
    }
    EXPECT_EQ(parse_certified_scheme("pu"), CertifiedScheme::factorized_pu);
}
