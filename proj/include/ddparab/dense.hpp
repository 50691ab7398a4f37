#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddparab/sparse.hpp"

namespace ddparab {

/// Row-major dense matrix used by the stability analysis.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix diagonal(std::span<const double> d) {
        DenseMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    const std::vector<double>& data() const { return data_; }

    DenseMatrix transpose() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    DenseMatrix& operator+=(const DenseMatrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    DenseMatrix& operator-=(const DenseMatrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    DenseMatrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }
    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
    friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

    Vector apply(std::span<const double> x) const {
        if (x.size() != cols_) throw std::invalid_argument("DenseMatrix::apply: dimension mismatch");
        Vector y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check_same(const DenseMatrix& o) const {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw std::invalid_argument("DenseMatrix: dimension mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline constexpr std::size_t kDefaultDenseCap = 5000;

inline DenseMatrix to_dense(const SparseMatrix& a, std::size_t cap = kDefaultDenseCap) {
    if (a.rows() > cap || a.cols() > cap) {
        throw std::length_error("to_dense: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " exceeds dense cap " + std::to_string(cap));
    }
    DenseMatrix d(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
            d(i, a.col_indices()[k]) += a.values()[k];
    return d;
}

inline DenseMatrix dense_multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("dense_multiply: dimension mismatch");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

/// LU factorization with partial pivoting.
class LuFactorization {
public:
    explicit LuFactorization(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
        const std::size_t n = lu_.rows();
        if (lu_.cols() != n) throw std::invalid_argument("LuFactorization: matrix must be square");
        for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
        double scale = lu_.max_abs();
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
            if (std::abs(lu_(p, k)) <= scale * 64.0 * std::numeric_limits<double>::epsilon()) {
                throw std::domain_error("LuFactorization: matrix is singular to working precision");
            }
            if (p != k) {
                std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
                std::swap(perm_[k], perm_[p]);
            }
            const double pivot = lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const double l = lu_(i, k) / pivot;
                lu_(i, k) = l;
                if (l == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
            }
        }
    }

    std::size_t size() const { return lu_.rows(); }

    Vector solve(std::span<const double> b) const {
        const std::size_t n = size();
        if (b.size() != n) throw std::invalid_argument("LuFactorization::solve: dimension mismatch");
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = x[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
            x[i] = s / lu_(i, i);
        }
        return x;
    }

    DenseMatrix solve(const DenseMatrix& b) const {
        if (b.rows() != size()) throw std::invalid_argument("LuFactorization::solve: dimension mismatch");
        const DenseMatrix bt = b.transpose();
        DenseMatrix xt(b.cols(), b.rows());
        for (std::size_t c = 0; c < b.cols(); ++c) {
            const Vector x = solve(bt.row(c));
            std::copy(x.begin(), x.end(), xt.row(c).begin());
        }
        return xt.transpose();
    }

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

/// Lower-triangular L with A = L L^T for symmetric positive definite A.
inline DenseMatrix cholesky_factor(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("cholesky_factor: matrix must be square");
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw std::domain_error("cholesky_factor: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// L^{-1} B for lower-triangular L.
inline DenseMatrix lower_triangular_solve(const DenseMatrix& l, const DenseMatrix& b) {
    const std::size_t n = l.rows();
    if (l.cols() != n || b.rows() != n) throw std::invalid_argument("lower_triangular_solve: dimension mismatch");
    DenseMatrix x = b;
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = l(i, k);
            if (lik == 0.0) continue;
            const auto xk = x.row(k);
            for (std::size_t j = 0; j < x.cols(); ++j) xi[j] -= lik * xk[j];
        }
        for (double& v : xi) v /= l(i, i);
    }
    return x;
}

/// A^{-1} B.
inline DenseMatrix dense_solve(const DenseMatrix& a, const DenseMatrix& b) { return LuFactorization(a).solve(b); }

/// Eigenvalues of a symmetric matrix in ascending order (Householder
/// tridiagonalization followed by implicit QL with Wilkinson shifts).
inline std::vector<double> symmetric_eigenvalues(const DenseMatrix& input) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw std::invalid_argument("symmetric_eigenvalues: matrix must be square");
    if (n == 0) return {};
    DenseMatrix a = input;
    std::vector<double> d(n), e(n, 0.0);

    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                const double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    double gj = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) gj += a(j, k) * a(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) gj += a(k, j) * a(i, k);
                    e[j] = gj / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    const double fj = a(i, j);
                    const double gj = e[j] - hh * fj;
                    e[j] = gj;
                    for (std::size_t k = 0; k <= j; ++k) a(j, k) -= fj * e[k] + gj * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);

    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (++iter > 60) throw std::runtime_error("symmetric_eigenvalues: QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? r : -r));
                double s = 1.0, c = 1.0, p = 0.0;
                std::size_t i = m;
                bool deflated = false;
                while (i-- > l) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (deflated) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

/// Largest singular value, sqrt(lambda_max(A^T A)).
inline double dense_spectral_norm(const DenseMatrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const DenseMatrix ata = dense_multiply(a.transpose(), a);
    const auto ev = symmetric_eigenvalues(ata);
    return std::sqrt(std::max(ev.back(), 0.0));
}

/// Power iteration on A^T A; stops when successive estimates agree to rel_tol.
/// Converges from below, so it is a lower bound when it stops early.
inline double spectral_norm_power_iteration(const DenseMatrix& a, double rel_tol = 1e-10,
                                            std::size_t max_iter = 100000) {
    const std::size_t n = a.cols();
    if (n == 0 || a.rows() == 0) return 0.0;
    const DenseMatrix at = a.transpose();
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i) + 1.0);
    double v_norm = norm2(v);
    for (double& x : v) x /= v_norm;
    double estimate = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector w = at.apply(a.apply(v));
        const double next = std::sqrt(std::max(dot(v, w), 0.0));
        const double w_norm = norm2(w);
        if (w_norm == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / w_norm;
        if (it > 0 && std::abs(next - estimate) <= rel_tol * next) return next;
        estimate = next;
    }
    return estimate;
}

}  // namespace ddparab
