#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ddparab/mesh.hpp"

namespace ddparab {

enum class WeightTag { unit, eta1, eta2, chi1, chi2, chi12 };

inline std::string_view to_string(WeightTag tag) {
    switch (tag) {
        case WeightTag::unit: return "unit";
        case WeightTag::eta1: return "eta1";
        case WeightTag::eta2: return "eta2";
        case WeightTag::chi1: return "chi1";
        case WeightTag::chi2: return "chi2";
        case WeightTag::chi12: return "chi12";
    }
    return "unknown";
}

/// Per-triangle coefficient weight in [0, 1].
struct WeightField {
    WeightTag tag = WeightTag::unit;
    std::vector<double> values;

    static WeightField unit(const Mesh& mesh) { return {WeightTag::unit, std::vector<double>(mesh.num_triangles(), 1.0)}; }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t t) const { return values[t]; }

    bool is_indicator() const {
        return tag == WeightTag::chi1 || tag == WeightTag::chi2 || tag == WeightTag::chi12;
    }
};

/// Two overlapping strips split along x1: Omega_1 = {x1 < split + delta},
/// Omega_2 = {x1 > split - delta}; the overlap has width 2 * delta.
struct StripDecomposition {
    double split = 0.5;
    double delta = 0.05;

    double left_edge() const { return split - delta; }
    double right_edge() const { return split + delta; }

    void validate() const {
        if (!(delta >= 0.0)) throw std::invalid_argument("StripDecomposition: delta must be >= 0");
        if (!(split - delta > 0.0) || !(split + delta < 1.0)) {
            throw std::invalid_argument("StripDecomposition: overlap strip must lie inside (0, 1)");
        }
    }
};

/// Partition-of-unity weight of subdomain 1 at abscissa x1: linear ramp
/// from 1 at split - delta to 0 at split + delta.
inline double eta1_at(const StripDecomposition& d, double x1) {
    if (d.delta == 0.0) return x1 < d.split ? 1.0 : 0.0;
    if (x1 <= d.left_edge()) return 1.0;
    if (x1 >= d.right_edge()) return 0.0;
    return (d.right_edge() - x1) / (2.0 * d.delta);
}

inline double chi1_at(const StripDecomposition& d, double x1) { return x1 < d.right_edge() ? 1.0 : 0.0; }
inline double chi2_at(const StripDecomposition& d, double x1) { return x1 > d.left_edge() ? 1.0 : 0.0; }

struct EtaFields {
    WeightField eta1;
    WeightField eta2;
};

struct ChiFields {
    WeightField chi1;
    WeightField chi2;
    WeightField chi12;
};

inline EtaFields eta_fields(const StripDecomposition& decomp, const Mesh& mesh) {
    decomp.validate();
    EtaFields f{{WeightTag::eta1, {}}, {WeightTag::eta2, {}}};
    f.eta1.values.reserve(mesh.num_triangles());
    f.eta2.values.reserve(mesh.num_triangles());
    for (const auto& t : mesh.triangles) {
        const double e1 = eta1_at(decomp, mesh.barycenter(t).x1);
        f.eta1.values.push_back(e1);
        f.eta2.values.push_back(1.0 - e1);
    }
    return f;
}

inline ChiFields chi_fields(const StripDecomposition& decomp, const Mesh& mesh) {
    decomp.validate();
    ChiFields f{{WeightTag::chi1, {}}, {WeightTag::chi2, {}}, {WeightTag::chi12, {}}};
    for (auto* w : {&f.chi1, &f.chi2, &f.chi12}) w->values.reserve(mesh.num_triangles());
    for (const auto& t : mesh.triangles) {
        const double x1 = mesh.barycenter(t).x1;
        const double c1 = chi1_at(decomp, x1);
        const double c2 = chi2_at(decomp, x1);
        f.chi1.values.push_back(c1);
        f.chi2.values.push_back(c2);
        f.chi12.values.push_back(c1 * c2);
    }
    return f;
}

struct ProfileRow {
    double x1;
    double eta1, eta2, chi1, chi2, chi12;
};

struct DecompositionReport {
    std::size_t elements_subdomain1 = 0;  ///< triangles with chi1 = 1
    std::size_t elements_subdomain2 = 0;  ///< triangles with chi2 = 1
    std::size_t elements_overlap = 0;     ///< triangles with chi12 = 1
    std::size_t overlap_cell_columns = 0;
    double overlap_fraction = 0.0;        ///< overlap triangles / all triangles
    std::vector<ProfileRow> profile;
};

/// Element counts and sampled 1D profiles of the weight functions along x1.
inline DecompositionReport decomposition_report(const StripDecomposition& decomp, const Mesh& mesh,
                                                std::size_t samples = 201) {
    decomp.validate();
    const ChiFields chi = chi_fields(decomp, mesh);
    DecompositionReport r;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        r.elements_subdomain1 += chi.chi1[t] == 1.0;
        r.elements_subdomain2 += chi.chi2[t] == 1.0;
        r.elements_overlap += chi.chi12[t] == 1.0;
    }
    // Two triangles per cell, n_intervals cells per column.
    r.overlap_cell_columns = r.elements_overlap / (2 * mesh.n_intervals);
    r.overlap_fraction = static_cast<double>(r.elements_overlap) / static_cast<double>(mesh.num_triangles());
    if (samples < 2) samples = 2;
    r.profile.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const double x1 = static_cast<double>(s) / static_cast<double>(samples - 1);
        const double e1 = eta1_at(decomp, x1);
        const double c1 = chi1_at(decomp, x1);
        const double c2 = chi2_at(decomp, x1);
        r.profile.push_back({x1, e1, 1.0 - e1, c1, c2, c1 * c2});
    }
    return r;
}

}  // namespace ddparab
