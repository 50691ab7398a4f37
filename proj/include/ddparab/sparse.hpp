#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddparab {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                 std::vector<std::size_t> col_indices, std::vector<double> values)
        : n_rows_(n_rows),
          n_cols_(n_cols),
          row_offsets_(std::move(row_offsets)),
          col_indices_(std::move(col_indices)),
          values_(std::move(values)) {
        validate();
    }

    std::size_t rows() const { return n_rows_; }
    std::size_t cols() const { return n_cols_; }
    std::size_t nonzeros() const { return values_.size(); }
    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<std::size_t>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry (i, j); zero when not stored.
    double coeff(std::size_t i, std::size_t j) const {
        const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_.at(i));
        const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_.at(i + 1));
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return values_[static_cast<std::size_t>(it - col_indices_.begin())];
    }

    Vector diagonal() const {
        Vector d(std::min(n_rows_, n_cols_), 0.0);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = coeff(i, i);
        return d;
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        if (x.size() != n_cols_ || y.size() != n_rows_) {
            throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
        }
        for (std::size_t i = 0; i < n_rows_; ++i) {
            double s = 0.0;
            for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
                s += values_[k] * x[col_indices_[k]];
            }
            y[i] = s;
        }
    }

    /// Structure-preserving linear combination a*this + b*other. Both operands
    /// must share the same sparsity pattern (true for all FEM assemblies on one mesh).
    SparseMatrix combine(double a, const SparseMatrix& other, double b) const {
        if (other.row_offsets_ != row_offsets_ || other.col_indices_ != col_indices_) {
            return combine_general(a, other, b);
        }
        std::vector<double> v(values_.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * values_[k] + b * other.values_[k];
        return SparseMatrix(n_rows_, n_cols_, row_offsets_, col_indices_, std::move(v));
    }

    SparseMatrix scaled(double s) const {
        std::vector<double> v = values_;
        for (double& x : v) x *= s;
        return SparseMatrix(n_rows_, n_cols_, row_offsets_, col_indices_, std::move(v));
    }

    /// this + diag(d).
    SparseMatrix add_diagonal(std::span<const double> d) const;

private:
    SparseMatrix combine_general(double a, const SparseMatrix& other, double b) const;

    void validate() const {
        if (row_offsets_.size() != n_rows_ + 1 || row_offsets_.front() != 0 ||
            row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
            throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
        }
        for (std::size_t i = 0; i < n_rows_; ++i) {
            if (row_offsets_[i] > row_offsets_[i + 1]) {
                throw std::invalid_argument("SparseMatrix: row offsets must be nondecreasing");
            }
            for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
                if (col_indices_[k] >= n_cols_) throw std::out_of_range("SparseMatrix: column out of range");
                if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
                    throw std::invalid_argument("SparseMatrix: columns must increase within a row");
                }
            }
        }
    }

    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// Builds a sorted CSR matrix; duplicate (i, j) entries are summed.
inline SparseMatrix csr_from_triplets(std::size_t n_rows, std::size_t n_cols, std::span<const Triplet> triplets) {
    std::vector<std::size_t> count(n_rows + 1, 0);
    for (const auto& t : triplets) {
        if (t.row >= n_rows || t.col >= n_cols) {
            throw std::out_of_range("csr_from_triplets: index (" + std::to_string(t.row) + ", " +
                                    std::to_string(t.col) + ") out of range");
        }
        ++count[t.row + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());

    // Bucket by row, then sort and merge each row.
    std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
    std::vector<std::pair<std::size_t, double>> buckets(triplets.size());
    for (const auto& t : triplets) buckets[cursor[t.row]++] = {t.col, t.value};

    std::vector<std::size_t> offsets(n_rows + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (std::size_t i = 0; i < n_rows; ++i) {
        auto first = buckets.begin() + static_cast<std::ptrdiff_t>(count[i]);
        auto last = buckets.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
        std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last; ++it) {
            if (!cols.empty() && cols.size() > offsets[i] && cols.back() == it->first) {
                vals.back() += it->second;
            } else {
                cols.push_back(it->first);
                vals.push_back(it->second);
            }
        }
        offsets[i + 1] = cols.size();
    }
    return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

inline SparseMatrix SparseMatrix::combine_general(double a, const SparseMatrix& other, double b) const {
    if (other.n_rows_ != n_rows_ || other.n_cols_ != n_cols_) {
        throw std::invalid_argument("SparseMatrix::combine: dimension mismatch");
    }
    std::vector<Triplet> t;
    t.reserve(nonzeros() + other.nonzeros());
    for (std::size_t i = 0; i < n_rows_; ++i) {
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) t.push_back({i, col_indices_[k], a * values_[k]});
        for (std::size_t k = other.row_offsets_[i]; k < other.row_offsets_[i + 1]; ++k) {
            t.push_back({i, other.col_indices_[k], b * other.values_[k]});
        }
    }
    return csr_from_triplets(n_rows_, n_cols_, t);
}

inline SparseMatrix SparseMatrix::add_diagonal(std::span<const double> d) const {
    if (d.size() != n_rows_ || n_rows_ != n_cols_) throw std::invalid_argument("add_diagonal: dimension mismatch");
    bool has_full_diagonal = true;
    for (std::size_t i = 0; i < n_rows_ && has_full_diagonal; ++i) {
        const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
        const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
        has_full_diagonal = std::binary_search(first, last, i);
    }
    if (!has_full_diagonal) {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < n_rows_; ++i) t.push_back({i, i, d[i]});
        const SparseMatrix diag = csr_from_triplets(n_rows_, n_cols_, t);
        return combine_general(1.0, diag, 1.0);
    }
    std::vector<double> v = values_;
    for (std::size_t i = 0; i < n_rows_; ++i) {
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            if (col_indices_[k] == i) v[k] += d[i];
        }
    }
    return SparseMatrix(n_rows_, n_cols_, row_offsets_, col_indices_, std::move(v));
}

inline Vector matvec(const SparseMatrix& a, std::span<const double> x) {
    Vector y(a.rows());
    a.multiply(x, y);
    return y;
}

/// Conjugate gradients did not reach the requested residual.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, std::size_t iterations)
        : std::runtime_error(what + " (relative residual " + std::to_string(residual) + " after " +
                             std::to_string(iterations) + " iterations)"),
          residual_(residual),
          iterations_(iterations) {}

    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

struct CgOptions {
    double rel_tol = 1e-10;
    /// 0 selects 10 * n.
    std::size_t max_iter = 0;
};

struct CgStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
/// Returns x with ||A x - b|| <= rel_tol ||b|| (true residual). If x0 is
/// non-empty it is used as the initial guess.
inline Vector solve_spd(const SparseMatrix& a, std::span<const double> b, const CgOptions& options = {},
                        std::span<const double> x0 = {}, CgStats* stats = nullptr) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_spd: dimension mismatch");
    if (!(options.rel_tol > 0.0)) throw std::invalid_argument("solve_spd: rel_tol must be positive");
    if (!x0.empty() && x0.size() != n) throw std::invalid_argument("solve_spd: initial guess size mismatch");
    const std::size_t max_iter = options.max_iter == 0 ? 10 * std::max<std::size_t>(n, 1) : options.max_iter;

    Vector inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw std::invalid_argument("solve_spd: nonpositive diagonal entry, matrix is not SPD");
        d = 1.0 / d;
    }

    Vector x = x0.empty() ? Vector(n, 0.0) : Vector(x0.begin(), x0.end());
    const double b_norm = norm2(b);
    if (b_norm == 0.0) {
        if (stats) *stats = {};
        return Vector(n, 0.0);
    }
    const double target = options.rel_tol * b_norm;

    Vector r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        a.multiply(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        return norm2(r);
    };
    double r_norm = true_residual();
    std::size_t it = 0;
    while (r_norm > target && it < max_iter) {
        // (Re)start from the true residual.
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = dot(r, z);
        while (it < max_iter) {
            a.multiply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) throw SolverError("solve_spd: breakdown, matrix is not positive definite", r_norm / b_norm, it);
            const double alpha = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++it;
            r_norm = norm2(r);
            if (r_norm <= target) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        r_norm = true_residual();
    }
    if (stats) *stats = {it, r_norm / b_norm};
    if (r_norm > target) throw SolverError("solve_spd: no convergence", r_norm / b_norm, it);
    return x;
}

}  // namespace ddparab
