#pragma once
// Eigen-backed reference computations used only by the tests.

#include <Eigen/Dense>

#include "ddparab.hpp"

namespace oracle {

inline Eigen::MatrixXd eig(const ddparab::DenseMatrix& a) {
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    return m;
}

inline Eigen::MatrixXd eig(const ddparab::SparseMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    const auto& off = a.row_offsets();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t p = off[i]; p < off[i + 1]; ++p) m(i, a.col_indices()[p]) = a.values()[p];
    return m;
}

inline Eigen::VectorXd eig(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline ddparab::Vector vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::MatrixXd diag(std::span<const double> d) { return eig(d).asDiagonal(); }

/// ||D X D^{-1}||_2 with D = diag(sqrt(m)), via SVD.
inline double weighted_norm(const Eigen::MatrixXd& x, std::span<const double> mass) {
    const Eigen::VectorXd s = eig(mass).cwiseSqrt();
    const Eigen::MatrixXd w = s.asDiagonal() * x * s.cwiseInverse().asDiagonal();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues()(0);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline ddparab::Vector random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ddparab::Vector v(n);
    for (double& x : v) x = normal(rng);
    return v;
}

}  // namespace oracle
