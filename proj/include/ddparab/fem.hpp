#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddparab/decomposition.hpp"
#include "ddparab/mesh.hpp"
#include "ddparab/sparse.hpp"

namespace ddparab {

/// Coefficients of -div(k grad u) + c u = f.
struct Coefficients {
    std::function<double(double, double)> k = [](double, double) { return 1.0; };
    std::function<double(double, double)> c = [](double, double) { return 0.0; };
    std::function<double(double, double, double)> f = [](double, double, double) { return 0.0; };
    /// When false the load vector is assembled once and reused at every step.
    bool source_depends_on_time = false;
};

/// Diagonal lumped mass. `diagonal` holds one entry per node of whatever
/// index space it was built on (all nodes, or interior nodes after restrict).
struct LumpedMass {
    std::vector<double> diagonal;

    std::size_t size() const { return diagonal.size(); }

    LumpedMass restrict_to(const InteriorIndexMap& map) const { return {map.restrict_to_interior(diagonal)}; }

    std::vector<double> sqrt_diagonal() const {
        std::vector<double> s(diagonal.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(diagonal[i]);
        return s;
    }
};

namespace detail {

struct LocalGeometry {
    double area;
    std::array<std::array<double, 2>, 3> grad;  ///< gradients of the three P1 hat functions
};

inline LocalGeometry local_geometry(const Mesh& mesh, const Triangle& t) {
    const Point& a = mesh.nodes[t[0]];
    const Point& b = mesh.nodes[t[1]];
    const Point& c = mesh.nodes[t[2]];
    const double two_area = (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2);
    LocalGeometry g{0.5 * two_area, {}};
    g.grad[0] = {(b.x2 - c.x2) / two_area, (c.x1 - b.x1) / two_area};
    g.grad[1] = {(c.x2 - a.x2) / two_area, (a.x1 - c.x1) / two_area};
    g.grad[2] = {(a.x2 - b.x2) / two_area, (b.x1 - a.x1) / two_area};
    return g;
}

/// Keeps entries whose row and column are both interior, renumbered densely.
inline std::vector<Triplet> restrict_triplets(const std::vector<Triplet>& full, const InteriorIndexMap& map) {
    std::vector<Triplet> out;
    out.reserve(full.size());
    for (const auto& t : full) {
        const auto i = map.dense(t.row);
        const auto j = map.dense(t.col);
        if (i && j) out.push_back({*i, *j, t.value});
    }
    return out;
}

}  // namespace detail

/// Local P1 stiffness of one triangle with unit coefficient: area * grad_i . grad_j.
inline std::array<std::array<double, 3>, 3> local_stiffness(const Mesh& mesh, const Triangle& t) {
    const auto g = detail::local_geometry(mesh, t);
    std::array<std::array<double, 3>, 3> k{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) k[i][j] = g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
    return k;
}

/// Weighted stiffness on all nodes as triplets. The reaction term c u v is
/// integrated with the lumped (vertex) rule so that it is c times the
/// lumped mass for constant c.
inline std::vector<Triplet> stiffness_triplets(const Mesh& mesh, const WeightField& weights, const Coefficients& coeff) {
    if (weights.size() != mesh.num_triangles()) {
        throw std::invalid_argument("assemble_stiffness: weight field has " + std::to_string(weights.size()) +
                                    " values for " + std::to_string(mesh.num_triangles()) + " triangles");
    }
    std::vector<Triplet> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        const Triangle& t = mesh.triangles[e];
        const double w = weights[e];
        if (!(w >= 0.0 && w <= 1.0)) {
            throw std::domain_error("assemble_stiffness: weight " + std::to_string(w) + " outside [0,1] on triangle " +
                                    std::to_string(e));
        }
        const Point b = mesh.barycenter(t);
        const double kb = coeff.k(b.x1, b.x2);
        const double cb = coeff.c(b.x1, b.x2);
        if (!(kb > 0.0)) throw std::domain_error("assemble_stiffness: k <= 0 on triangle " + std::to_string(e));
        if (!(cb >= 0.0)) throw std::domain_error("assemble_stiffness: c < 0 on triangle " + std::to_string(e));
        if (w == 0.0) continue;
        const auto g = detail::local_geometry(mesh, t);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                double v = w * kb * g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
                if (i == j) v += w * cb * g.area / 3.0;
                trip.push_back({t[i], t[j], v});
            }
        }
    }
    return trip;
}

/// Weighted stiffness K(w) on interior unknowns.
inline SparseMatrix assemble_stiffness(const Mesh& mesh, const InteriorIndexMap& map, const WeightField& weights,
                                       const Coefficients& coeff = {}) {
    const auto trip = detail::restrict_triplets(stiffness_triplets(mesh, weights, coeff), map);
    return csr_from_triplets(map.size(), map.size(), trip);
}

/// Consistent P1 mass on all nodes: (area/12) [[2,1,1],[1,2,1],[1,1,2]] per triangle.
inline SparseMatrix assemble_mass(const Mesh& mesh) {
    std::vector<Triplet> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (const auto& t : mesh.triangles) {
        const double area = mesh.signed_area(t);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) trip.push_back({t[i], t[j], area / 12.0 * (i == j ? 2.0 : 1.0)});
    }
    return csr_from_triplets(mesh.num_nodes(), mesh.num_nodes(), trip);
}

inline SparseMatrix assemble_mass(const Mesh& mesh, const InteriorIndexMap& map) {
    std::vector<Triplet> full;
    const SparseMatrix m = assemble_mass(mesh);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = m.row_offsets()[i]; k < m.row_offsets()[i + 1]; ++k)
            full.push_back({i, m.col_indices()[k], m.values()[k]});
    return csr_from_triplets(map.size(), map.size(), detail::restrict_triplets(full, map));
}

/// Row-sum lumping.
inline LumpedMass lump_mass(const SparseMatrix& consistent) {
    LumpedMass m{std::vector<double>(consistent.rows(), 0.0)};
    for (std::size_t i = 0; i < consistent.rows(); ++i)
        for (std::size_t k = consistent.row_offsets()[i]; k < consistent.row_offsets()[i + 1]; ++k)
            m.diagonal[i] += consistent.values()[k];
    return m;
}

/// Lumped mass restricted to interior nodes (lumping happens before restriction).
inline LumpedMass interior_lumped_mass(const Mesh& mesh, const InteriorIndexMap& map) {
    return lump_mass(assemble_mass(mesh)).restrict_to(map);
}

/// Load vector on all nodes: f(barycenter, t) * area / 3 to each vertex.
inline Vector assemble_load_full(const Mesh& mesh, const Coefficients& coeff, double t) {
    Vector load(mesh.num_nodes(), 0.0);
    for (const auto& tri : mesh.triangles) {
        const Point b = mesh.barycenter(tri);
        const double share = coeff.f(b.x1, b.x2, t) * mesh.signed_area(tri) / 3.0;
        for (std::size_t v : tri) load[v] += share;
    }
    return load;
}

inline Vector assemble_load(const Mesh& mesh, const InteriorIndexMap& map, const Coefficients& coeff, double t) {
    return map.restrict_to_interior(assemble_load_full(mesh, coeff, t));
}

/// Discrete L2 norm sqrt(sum m_i v_i^2).
inline double l2_norm(std::span<const double> mass, std::span<const double> v) {
    if (mass.size() != v.size()) throw std::invalid_argument("l2_norm: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += mass[i] * v[i] * v[i];
    return std::sqrt(s);
}

inline double l2_norm(const LumpedMass& mass, std::span<const double> v) { return l2_norm(mass.diagonal, v); }

}  // namespace ddparab
