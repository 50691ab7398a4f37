#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace ddparab {

struct Point {
    double x1 = 0.0;
    double x2 = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

using Triangle = std::array<std::size_t, 3>;

/// Structured P1 triangulation of the unit square.
///
/// Nodes are numbered row-major with x2 as the outer index. Every grid
/// cell is split along its lower-left to upper-right diagonal, so each
/// triangle is counterclockwise with area h^2/2.
struct Mesh {
    std::size_t n_intervals = 0;
    double h = 0.0;
    std::vector<Point> nodes;
    std::vector<Triangle> triangles;
    std::vector<bool> boundary_mask;

    std::size_t node_index(std::size_t i, std::size_t j) const { return j * (n_intervals + 1) + i; }
    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_triangles() const { return triangles.size(); }

    double signed_area(const Triangle& t) const {
        const Point& a = nodes[t[0]];
        const Point& b = nodes[t[1]];
        const Point& c = nodes[t[2]];
        return 0.5 * ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2));
    }

    Point barycenter(const Triangle& t) const {
        const Point& a = nodes[t[0]];
        const Point& b = nodes[t[1]];
        const Point& c = nodes[t[2]];
        return {(a.x1 + b.x1 + c.x1) / 3.0, (a.x2 + b.x2 + c.x2) / 3.0};
    }

    friend bool operator==(const Mesh&, const Mesh&) = default;
};

inline Mesh build_unit_square_mesh(std::size_t n_intervals) {
    if (n_intervals < 2) {
        throw std::invalid_argument("build_unit_square_mesh: n_intervals must be >= 2");
    }
    Mesh mesh;
    mesh.n_intervals = n_intervals;
    mesh.h = 1.0 / static_cast<double>(n_intervals);
    const std::size_t np = n_intervals + 1;
    mesh.nodes.reserve(np * np);
    mesh.boundary_mask.reserve(np * np);
    for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t i = 0; i < np; ++i) {
            // Exact end points: i/n rather than i*h keeps x = 1 bit-exact.
            mesh.nodes.push_back({static_cast<double>(i) / static_cast<double>(n_intervals),
                                  static_cast<double>(j) / static_cast<double>(n_intervals)});
            mesh.boundary_mask.push_back(i == 0 || j == 0 || i == n_intervals || j == n_intervals);
        }
    }
    mesh.triangles.reserve(2 * n_intervals * n_intervals);
    for (std::size_t j = 0; j < n_intervals; ++j) {
        for (std::size_t i = 0; i < n_intervals; ++i) {
            const std::size_t ll = mesh.node_index(i, j);
            const std::size_t lr = mesh.node_index(i + 1, j);
            const std::size_t ur = mesh.node_index(i + 1, j + 1);
            const std::size_t ul = mesh.node_index(i, j + 1);
            mesh.triangles.push_back({ll, lr, ur});
            mesh.triangles.push_back({ll, ur, ul});
        }
    }
    return mesh;
}

/// Dense numbering of the interior (non-Dirichlet) nodes, in node order.
class InteriorIndexMap {
public:
    explicit InteriorIndexMap(const Mesh& mesh) : to_dense_(mesh.num_nodes()) {
        for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
            if (!mesh.boundary_mask[k]) {
                to_dense_[k] = to_node_.size();
                to_node_.push_back(k);
            }
        }
    }

    std::size_t size() const { return to_node_.size(); }
    std::optional<std::size_t> dense(std::size_t node) const { return to_dense_.at(node); }
    std::size_t node(std::size_t dense_index) const { return to_node_.at(dense_index); }
    const std::vector<std::size_t>& nodes() const { return to_node_; }

    /// Scatter an interior vector onto all nodes, boundary values set to zero.
    std::vector<double> prolong(const std::vector<double>& interior) const {
        if (interior.size() != size()) {
            throw std::invalid_argument("InteriorIndexMap::prolong: size mismatch");
        }
        std::vector<double> full(to_dense_.size(), 0.0);
        for (std::size_t d = 0; d < to_node_.size(); ++d) full[to_node_[d]] = interior[d];
        return full;
    }

    std::vector<double> restrict_to_interior(const std::vector<double>& full) const {
        if (full.size() != to_dense_.size()) {
            throw std::invalid_argument("InteriorIndexMap::restrict_to_interior: size mismatch");
        }
        std::vector<double> interior(size());
        for (std::size_t d = 0; d < to_node_.size(); ++d) interior[d] = full[to_node_[d]];
        return interior;
    }

private:
    std::vector<std::optional<std::size_t>> to_dense_;
    std::vector<std::size_t> to_node_;
};

inline InteriorIndexMap interior_index_map(const Mesh& mesh) { return InteriorIndexMap(mesh); }

/// Debug listing: a "<num_nodes> <num_triangles>" header, one "index x1 x2"
/// line per node, then one "a b c" line per triangle.
inline void write_mesh_dump(const Mesh& mesh, std::ostream& os) {
    const auto old_precision = os.precision(17);
    os << mesh.num_nodes() << ' ' << mesh.num_triangles() << '\n';
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
        os << k << ' ' << mesh.nodes[k].x1 << ' ' << mesh.nodes[k].x2 << '\n';
    }
    for (const auto& t : mesh.triangles) {
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    os.precision(old_precision);
}

}  // namespace ddparab
