#include <gtest/gtest.h>

#include "oracle.hpp"

using namespace ddparab;

namespace {

SparseMatrix identity_csr(std::size_t n) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return csr_from_triplets(n, n, t);
}

SparseMatrix random_symmetric(std::size_t n, std::uint64_t seed, double shift = 0.0) {
    const auto r = oracle::random_vector(n * n, seed);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = r[i * n + j] + (i == j ? shift : 0.0);
            t.push_back({i, j, v});
            if (i != j) t.push_back({j, i, v});
        }
    return csr_from_triplets(n, n, t);
}

// A^T A + n I: SPD and reasonably conditioned.
SparseMatrix random_spd(std::size_t n, std::uint64_t seed) {
    const Eigen::MatrixXd a = oracle::eig(random_symmetric(n, seed));
    const Eigen::MatrixXd s = a.transpose() * a + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t.push_back({i, j, s(i, j)});
    return csr_from_triplets(n, n, t);
}

}  // namespace

TEST(Csr, DuplicatesSummed) {
    const std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}};
    const auto a = csr_from_triplets(1, 1, t);
    EXPECT_EQ(a.nonzeros(), 1u);
    EXPECT_EQ(a.coeff(0, 0), 3.0);
}

TEST(Csr, EmptyIsZero) {
    const auto a = csr_from_triplets(3, 3, std::span<const Triplet>{});
    EXPECT_EQ(matvec(a, std::vector<double>{1, 2, 3}), (std::vector<double>{0, 0, 0}));
}

TEST(Csr, IdentityMatvec) {
    const std::vector<double> x{1.5, -2, 3, 7};
    EXPECT_EQ(matvec(identity_csr(4), x), x);
}

TEST(Csr, OutOfRangeIsFault) {
    const std::vector<Triplet> t{{0, 3, 1.0}};
    EXPECT_THROW(csr_from_triplets(2, 2, t), std::out_of_range);
}

TEST(Csr, SortedStrictlyIncreasingColumns) {
    const std::vector<Triplet> t{{0, 2, 1.0}, {0, 0, 1.0}, {1, 1, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}};
    const auto a = csr_from_triplets(2, 3, t);
    EXPECT_EQ(a.col_indices(), (std::vector<std::size_t>{0, 1, 2, 1}));
    EXPECT_EQ(a.coeff(0, 2), 2.0);
}

TEST(Csr, MatvecDimensionMismatch) { EXPECT_THROW(matvec(identity_csr(3), std::vector<double>{1, 2}), std::invalid_argument); }

TEST(Csr, MatvecMatchesDenseOracle) {
    const auto a = random_symmetric(5, 7);
    const auto x = oracle::random_vector(5, 8);
    const Eigen::VectorXd ref = oracle::eig(a) * oracle::eig(x);
    EXPECT_LE(oracle::max_abs_diff(matvec(a, x), oracle::vec(ref)), 1e-14);
}

TEST(Csr, CombineAndScale) {
    const auto a = random_symmetric(6, 1);
    const auto b = identity_csr(6);
    const Eigen::MatrixXd ref = 2.0 * oracle::eig(a) - 3.0 * oracle::eig(b);
    EXPECT_LE((oracle::eig(a.combine(2.0, b, -3.0)) - ref).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((oracle::eig(a.scaled(-0.5)) + 0.5 * oracle::eig(a)).cwiseAbs().maxCoeff(), 0.0);
    const std::vector<double> d{1, 2, 3, 4, 5, 6};
    const std::vector<Triplet> offdiag{{0, 1, 1.0}, {1, 0, 1.0}};
    const auto c = csr_from_triplets(6, 6, offdiag).add_diagonal(d);
    EXPECT_EQ(c.coeff(5, 5), 6.0);
    EXPECT_EQ(c.coeff(0, 1), 1.0);
}

TEST(Cg, IdentityOneIteration) {
    const auto b = oracle::random_vector(10, 3);
    CgStats stats;
    const auto x = solve_spd(identity_csr(10), b, {}, {}, &stats);
    EXPECT_LE(oracle::max_abs_diff(x, b), 1e-15);
    EXPECT_LE(stats.iterations, 1u);
}

TEST(Cg, Diagonal) {
    const std::vector<Triplet> t{{0, 0, 2.0}, {1, 1, 4.0}};
    const auto x = solve_spd(csr_from_triplets(2, 2, t), std::vector<double>{2, 4});
    EXPECT_NEAR(x[0], 1.0, 1e-14);
    EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(Cg, StiffnessMatchesDirectSolve) {
    const Mesh mesh = build_unit_square_mesh(4);
    const auto map = interior_index_map(mesh);
    const auto k = assemble_stiffness(mesh, map, WeightField::unit(mesh));
    const std::vector<double> b(map.size(), 1.0);
    const Eigen::VectorXd ref = oracle::eig(k).lu().solve(oracle::eig(b));
    EXPECT_LE(oracle::max_abs_diff(solve_spd(k, b), oracle::vec(ref)), 1e-8);
}

TEST(Cg, TerminatesWithinNIterations) {
    for (std::size_t n : {5u, 20u, 50u}) {
        const auto a = random_spd(n, 100 + n);
        const auto b = oracle::random_vector(n, n);
        CgStats stats;
        CgOptions opt{1e-12, 0};
        const auto x = solve_spd(a, b, opt, {}, &stats);
        EXPECT_LE(stats.iterations, n) << n;
        const auto r = matvec(a, x);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res += (r[i] - b[i]) * (r[i] - b[i]);
        EXPECT_LE(std::sqrt(res), 1e-10 * norm2(b));
    }
}

TEST(Cg, NonConvergenceReportsResidual) {
    const auto a = random_spd(30, 9);
    const auto b = oracle::random_vector(30, 10);
    try {
        solve_spd(a, b, {1e-14, 2});
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_GT(e.residual(), 1e-14);
        EXPECT_EQ(e.iterations(), 2u);
    }
}

TEST(Cg, SymmetryWitness) {
    const Mesh mesh = build_unit_square_mesh(8);
    const auto map = interior_index_map(mesh);
    const auto k = assemble_stiffness(mesh, map, WeightField::unit(mesh));
    const auto x = oracle::random_vector(map.size(), 1);
    const auto y = oracle::random_vector(map.size(), 2);
    const double a = dot(matvec(k, x), y);
    const double b = dot(matvec(k, y), x);
    EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
}

TEST(Dense, ToDense) {
    EXPECT_EQ(to_dense(identity_csr(4)).data(), DenseMatrix::identity(4).data());
    EXPECT_EQ(to_dense(csr_from_triplets(3, 3, std::span<const Triplet>{})).max_abs(), 0.0);
    EXPECT_THROW(to_dense(identity_csr(10), 5), std::length_error);
}

TEST(Dense, RoundTripThroughTriplets) {
    const auto a = random_symmetric(7, 4);
    const DenseMatrix d = to_dense(a);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
            if (d(i, j) != 0.0) t.push_back({i, j, d(i, j)});
    const auto b = csr_from_triplets(7, 7, t);
    EXPECT_EQ(b.values(), a.values());
    EXPECT_EQ(b.col_indices(), a.col_indices());
}

TEST(Dense, SolveIdentityAndSingular) {
    const DenseMatrix b = to_dense(random_symmetric(4, 5));
    EXPECT_EQ(dense_solve(DenseMatrix::identity(4), b).data(), b.data());
    EXPECT_THROW(LuFactorization(DenseMatrix(3, 3)), std::domain_error);
}

TEST(Dense, SolveMatchesOracle) {
    const DenseMatrix a = to_dense(random_symmetric(8, 11, 5.0));
    const DenseMatrix b = to_dense(random_symmetric(8, 12));
    const Eigen::MatrixXd ref = oracle::eig(a).fullPivLu().solve(oracle::eig(b));
    EXPECT_LE((oracle::eig(dense_solve(a, b)) - ref).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_LE((oracle::eig(dense_multiply(a, b)) - oracle::eig(a) * oracle::eig(b)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Dense, SpectralNormDiagonal) {
    const std::vector<double> d{3.0, -7.0};
    EXPECT_NEAR(dense_spectral_norm(DenseMatrix::diagonal(d)), 7.0, 1e-14);
    EXPECT_NEAR(spectral_norm_power_iteration(DenseMatrix::diagonal(d)), 7.0, 1e-9);
}

TEST(Dense, SpectralNormMatchesSvd) {
    const auto r = oracle::random_vector(36, 77);
    DenseMatrix a(6, 6);
    for (std::size_t i = 0; i < 36; ++i) a(i / 6, i % 6) = r[i];
    const double ref = Eigen::JacobiSVD<Eigen::MatrixXd>(oracle::eig(a)).singularValues()(0);
    EXPECT_NEAR(dense_spectral_norm(a), ref, 1e-8 * ref);
    EXPECT_NEAR(spectral_norm_power_iteration(a), ref, 1e-8 * ref);
    EXPECT_NEAR(dense_spectral_norm(-2.5 * a), 2.5 * dense_spectral_norm(a), 1e-10 * ref);
}

TEST(Dense, SymmetricEigenvaluesMatchOracle) {
    const DenseMatrix a = to_dense(random_symmetric(12, 21));
    const auto ev = symmetric_eigenvalues(a);
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(oracle::eig(a)).eigenvalues();
    ASSERT_EQ(ev.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(ev[i], ref(i), 1e-12);
}

TEST(Dense, CholeskyAndTriangularSolve) {
    const DenseMatrix a = to_dense(random_spd(6, 3));
    const DenseMatrix l = cholesky_factor(a);
    EXPECT_LE((oracle::eig(dense_multiply(l, l.transpose())) - oracle::eig(a)).cwiseAbs().maxCoeff(), 1e-12);
    const DenseMatrix x = lower_triangular_solve(l, DenseMatrix::identity(6));
    EXPECT_LE((oracle::eig(dense_multiply(l, x)) - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-13);
}
