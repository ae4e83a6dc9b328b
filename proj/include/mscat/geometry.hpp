#pragma once
// Scatterer configurations: radii, centers, pairwise separations and
// directions, optional per-sphere orientation frames, validity checks,
// and the truncation-order heuristic.
//
// Lengths are dimensionless; unit conversions live at the CLI boundary.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"

namespace mscat {

struct Scatterer {
    int id = 0;
    double radius = 1.0;
    Vec3 center{};
};

struct Truncation {
    int l_max = 0;
    double tolerance = 1e-8;
};

// energies downstream are reported in units of the chemical potential
struct FermiGas {
    double k_F = 1.0;
    int nu_deg = 1;
};

struct PairData {
    int j = 0, jp = 0;       // ordered pair (row sphere, column sphere)
    double r = 0.0;          // center separation
    Vec3 dir_global{};       // unit vector from j to j', global frame
    Vec3 dir_local{};        // same direction expressed in sphere j's frame
    std::array<double, 3> euler{0.0, 0.0, 0.0};  // z-y-z angles of R_j^T R_j'
};

struct Configuration {
    std::vector<Scatterer> scatterers;
    std::vector<Rot3> frames;  // per-sphere orientation, identity by default
    std::vector<PairData> pairs;
    bool axial = false;  // all centers on one straight line
    Vec3 axis{0.0, 0.0, 1.0};

    int count() const { return static_cast<int>(scatterers.size()); }

    double max_radius() const {
        double m = 0.0;
        for (const auto& s : scatterers) m = std::max(m, s.radius);
        return m;
    }

    const PairData& pair(int j, int jp) const {
        for (const auto& p : pairs)
            if (p.j == j && p.jp == jp) return p;
        throw DomainError("Configuration::pair: no such ordered pair");
    }
};

inline Configuration build_configuration(std::vector<Scatterer> scatterers,
                                         std::vector<Rot3> frames = {}) {
    if (scatterers.empty())
        throw DomainError("build_configuration: need at least one scatterer");
    for (const auto& s : scatterers)
        if (!(s.radius > 0.0))
            throw DomainError("build_configuration: radius must be positive");
    if (!frames.empty() && frames.size() != scatterers.size())
        throw DomainError("build_configuration: one frame per scatterer");

    Configuration cfg;
    cfg.scatterers = std::move(scatterers);
    cfg.frames = frames.empty()
                     ? std::vector<Rot3>(cfg.scatterers.size(), Rot3::identity())
                     : std::move(frames);

    const int n = cfg.count();
    double scale = 0.0;
    for (const auto& s : cfg.scatterers)
        scale = std::max({scale, s.radius, s.center.norm()});

    for (int j = 0; j < n; ++j)
        for (int jp = 0; jp < n; ++jp) {
            if (j == jp) continue;
            const auto& sj = cfg.scatterers[static_cast<size_t>(j)];
            const auto& sp = cfg.scatterers[static_cast<size_t>(jp)];
            const Vec3 d = sp.center - sj.center;
            const double r = d.norm();
            if (r <= 1e-14 * scale || r == 0.0)
                throw DuplicateCenterError(
                    sj.id, sp.id,
                    "build_configuration: spheres " + std::to_string(sj.id) +
                        " and " + std::to_string(sp.id) + " share a center");
            if (r <= sj.radius + sp.radius)
                throw OverlapError(
                    sj.id, sp.id,
                    "build_configuration: spheres " + std::to_string(sj.id) +
                        " and " + std::to_string(sp.id) + " overlap (r = " +
                        std::to_string(r) + " <= " +
                        std::to_string(sj.radius + sp.radius) + ")");
            PairData p;
            p.j = j;
            p.jp = jp;
            p.r = r;
            p.dir_global = d * (1.0 / r);
            p.dir_local = cfg.frames[static_cast<size_t>(j)].apply_transposed(p.dir_global);
            const Rot3 q = cfg.frames[static_cast<size_t>(j)].transposed().compose(
                cfg.frames[static_cast<size_t>(jp)]);
            p.euler = q.to_euler_zyz();
            cfg.pairs.push_back(p);
        }

    // collinearity: every center sits on the line through the first two
    cfg.axial = true;
    if (n >= 2) {
        const Vec3 d0 = cfg.scatterers[1].center - cfg.scatterers[0].center;
        cfg.axis = d0 * (1.0 / d0.norm());
        for (int j = 2; j < n && cfg.axial; ++j) {
            const Vec3 d = cfg.scatterers[static_cast<size_t>(j)].center -
                           cfg.scatterers[0].center;
            if (d.cross(cfg.axis).norm() > 1e-12 * std::max(scale, d.norm()))
                cfg.axial = false;
        }
    }
    return cfg;
}

// convenience builder for the dominant use case
inline Configuration two_sphere_config(double a1, double a2, double r) {
    return build_configuration(
        {{0, a1, {0.0, 0.0, 0.0}}, {1, a2, {0.0, 0.0, r}}});
}

// partial waves localize at l ~ |k| a; a fixed margin covers the evanescent
// tail, and the convergence loop in the scattering layer refines upward
inline Truncation suggest_l_max(const Configuration& cfg, double abs_k,
                                double tolerance = 1e-8) {
    if (abs_k < 0.0) throw DomainError("suggest_l_max: |k| must be >= 0");
    const int margin = 8;
    const int l = static_cast<int>(std::ceil(abs_k * cfg.max_radius())) + margin;
    return {l, tolerance};
}

}  // namespace mscat
