#pragma once
// Geometry-dependent interaction energies built on the scattering engine.
//
// Two families:
//  * Fermi gas: the energy shift is an integral of the counting function
//    over the filled sea, E / mu = -(2/k_F^2) int_0^{k_F} k n_c(k) dk,
//    reported in units of the chemical potential.
//  * Massless scalar with Dirichlet spheres (and a Dirichlet plate through
//    the image construction): E = (hbar c / 2 pi) int_0^inf dkappa
//    ln det M(i kappa), reported in units of hbar c / length.
//
// Closed-form companions: the large-separation s-wave forms, the
// periodic-orbit (two-bounce) sum, and both proximity-force variants.

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "core.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "scattering.hpp"
#include "unwrap.hpp"

namespace mscat {

enum class EnergyUnits { chemical_potential, hbar_c_over_length };
enum class EnergyMethod { exact, swave_asymptotic, semiclassical, pfa };

struct EnergyResult {
    double value = 0.0;
    EnergyUnits units = EnergyUnits::hbar_c_over_length;
    EnergyMethod method = EnergyMethod::exact;
    int l_max = 0;            // cutoff used by matrix-based methods
    double quad_error = 0.0;  // propagated quadrature error estimate
    int scan_points = 0;      // spectral samples behind a real-axis scan
};

enum class GeometryKind { two_spheres, sphere_plate, n_spheres };

// One handle for every geometry the energy routines accept.  Spheres live in
// a Configuration; the plate is described by its sphere radius and gap.
struct GeometryQuery {
    GeometryKind kind = GeometryKind::two_spheres;
    Configuration cfg;          // two_spheres / n_spheres
    double plate_radius = 0.0;  // sphere_plate
    double plate_gap = 0.0;     // sphere_plate: surface-to-surface

    // smallest surface-to-surface distance, always positive by construction
    double gap() const {
        if (kind == GeometryKind::sphere_plate) return plate_gap;
        double g = std::numeric_limits<double>::infinity();
        for (const auto& pd : cfg.pairs)
            g = std::min(g, pd.r - cfg.scatterers[static_cast<size_t>(pd.j)].radius -
                                cfg.scatterers[static_cast<size_t>(pd.jp)].radius);
        return g;
    }
};

inline GeometryQuery make_two_spheres(double a1, double a2, double r) {
    GeometryQuery g;
    g.kind = GeometryKind::two_spheres;
    g.cfg = two_sphere_config(a1, a2, r);
    return g;
}

inline GeometryQuery make_sphere_plate(double a, double L) {
    if (!(a > 0.0)) throw DomainError("make_sphere_plate: radius must be positive");
    if (!(L > 0.0)) throw DomainError("make_sphere_plate: gap must be positive");
    GeometryQuery g;
    g.kind = GeometryKind::sphere_plate;
    g.plate_radius = a;
    g.plate_gap = L;
    return g;
}

inline GeometryQuery make_n_spheres(Configuration cfg) {
    GeometryQuery g;
    g.kind = (cfg.count() == 2 ? GeometryKind::two_spheres : GeometryKind::n_spheres);
    g.cfg = std::move(cfg);
    return g;
}

namespace detail_cas {

// spherical Bessel j_1 without table machinery
inline double j1_spherical(double x) {
    if (std::abs(x) < 1e-4) return x / 3.0 - x * x * x / 30.0;
    return std::sin(x) / (x * x) - std::cos(x) / x;
}

// generic cutoff stepping for an arbitrary ln det evaluator
template <class Eval>  // Eval: int l_max -> LogDet
ConvergedLogDet converge_l(Eval&& ev, double tol, int l_start, int l_cap = 64,
                           int step = 4) {
    int L = std::min(l_start, l_cap);
    std::vector<std::pair<int, double>> trace;
    LogDet prev = ev(L);
    double delta = std::numeric_limits<double>::infinity();
    while (L + step <= l_cap) {
        const int L2 = L + step;
        const LogDet cur = ev(L2);
        delta = std::abs(cur.real_part - prev.real_part) +
                std::abs(wrap_to_pi(cur.imag_part - prev.imag_part));
        trace.emplace_back(L2, delta);
        if (delta < tol) return {cur, L2, std::move(trace)};
        prev = cur;
        L = L2;
    }
    throw TruncationNoConvergence(
        L, delta, std::move(trace),
        "converge_l: no convergence by l_max = " + std::to_string(L));
}

// ln det on the positive imaginary axis for each supported geometry, with the
// cutoff frozen from probe points where the integrand actually lives
struct ImagAxisEval {
    GeometryKind kind;
    double a1 = 0, a2 = 0, r = 0;  // two-sphere / plate image parameters
    Configuration cfg;              // n-sphere fallback
    int l_max = 0;
    std::unique_ptr<TwoSphereAxial> op;

    double eval(double kappa) const {
        if (kind == GeometryKind::sphere_plate)
            return op->logdet(cplx(0.0, kappa), TwoSphereAxial::Mode::plate_odd)
                .real_part;
        if (op) return op->logdet(cplx(0.0, kappa)).real_part;
        return logdet_m(cfg, cplx(0.0, kappa), Truncation{l_max, 1e-12}).real_part;
    }
};

inline ImagAxisEval make_imag_eval(const GeometryQuery& g, double rel_tol,
                                   int lmax_override = -1) {
    ImagAxisEval ev;
    ev.kind = g.kind;
    const double gap = g.gap();
    if (!(gap > 0.0)) throw DomainError("imaginary-axis energy: gap must be positive");

    auto probe_logdet = [&](double kappa, int L) -> LogDet {
        if (g.kind == GeometryKind::sphere_plate) {
            const double R = 2.0 * (g.plate_gap + g.plate_radius);
            return TwoSphereAxial(g.plate_radius, g.plate_radius, R, L)
                .logdet(cplx(0.0, kappa), TwoSphereAxial::Mode::plate_odd);
        }
        if (g.cfg.axial && g.cfg.count() == 2) {
            return TwoSphereAxial(g.cfg.scatterers[0].radius,
                                  g.cfg.scatterers[1].radius, g.cfg.pair(0, 1).r, L)
                .logdet(cplx(0.0, kappa));
        }
        return logdet_m(g.cfg, cplx(0.0, kappa), Truncation{L, 1e-12});
    };

    int L = lmax_override;
    if (L < 0) {
        // scale reference where the integrand peaks, then converge the cutoff
        // against an absolute floor tied to the requested relative accuracy
        const double kappa_peak = 1.0 / gap;
        const int l_seed = 4;
        double scale = std::abs(probe_logdet(kappa_peak, l_seed + 8).real_part);
        if (!(scale > 0.0)) scale = 1e-12;
        const double tol_ld = std::max(1e-15, 0.01 * rel_tol * scale);
        L = 0;
        for (const double kp : {0.5 / gap, 1.5 / gap}) {
            const auto got = converge_l(
                [&](int Lc) { return probe_logdet(kp, Lc); }, tol_ld, l_seed, 64, 4);
            L = std::max(L, got.l_max);
        }
    }
    ev.l_max = L;

    if (g.kind == GeometryKind::sphere_plate) {
        const double R = 2.0 * (g.plate_gap + g.plate_radius);
        ev.a1 = ev.a2 = g.plate_radius;
        ev.r = R;
        ev.op = std::make_unique<TwoSphereAxial>(ev.a1, ev.a2, R, L);
    } else if (g.cfg.axial && g.cfg.count() == 2) {
        ev.a1 = g.cfg.scatterers[0].radius;
        ev.a2 = g.cfg.scatterers[1].radius;
        ev.r = g.cfg.pair(0, 1).r;
        ev.op = std::make_unique<TwoSphereAxial>(ev.a1, ev.a2, ev.r, L);
    } else {
        ev.cfg = g.cfg;
    }
    return ev;
}

}  // namespace detail_cas

// --- scalar field, Dirichlet boundaries, zero temperature ---

// E / (hbar c) = (1 / 2 pi) int_0^inf dkappa ln det M(i kappa); the tail
// beyond kappa = 45 / (2 gap) is below double precision by screening
inline EnergyResult scalar_energy(const GeometryQuery& g, double rel_tol = 1e-9,
                                  int lmax_override = -1) {
    if (!(rel_tol > 0.0)) throw DomainError("scalar_energy: rel_tol must be positive");
    const auto ev = detail_cas::make_imag_eval(g, rel_tol, lmax_override);
    const double gap = g.gap();
    const double kappa_hi = 45.0 / (2.0 * gap);
    QuadResult q;
    try {
        q = integrate_adaptive([&](double k) { return ev.eval(k); }, 0.0, kappa_hi,
                               rel_tol, 0.0, 4000);
    } catch (const ToleranceNotMet& e) {
        throw ToleranceNotMet(e.best_estimate / (2.0 * pi),
                              e.achieved_error / (2.0 * pi),
                              "scalar_energy: quadrature budget exhausted");
    }
    EnergyResult out;
    out.value = q.value / (2.0 * pi);
    out.units = EnergyUnits::hbar_c_over_length;
    out.method = EnergyMethod::exact;
    out.l_max = ev.l_max;
    out.quad_error = q.error_estimate / (2.0 * pi);
    return out;
}

inline EnergyResult scalar_energy_two_spheres(double a1, double a2, double r,
                                              double rel_tol = 1e-9,
                                              int lmax_override = -1) {
    return scalar_energy(make_two_spheres(a1, a2, r), rel_tol, lmax_override);
}

inline EnergyResult scalar_energy_sphere_plate(double a, double L,
                                               double rel_tol = 1e-9,
                                               int lmax_override = -1) {
    return scalar_energy(make_sphere_plate(a, L), rel_tol, lmax_override);
}

// leading proximity magnitude for a sphere near a plate; the curves in the
// sphere-plate comparison are reported in units of |this|
inline double pfa_leading_sphere_plate(double a, double L) {
    return -(pi * pi * pi) * a / (1440.0 * L * L);
}

// parallel-plate Casimir energy per unit area at separation d
inline double plate_plate_energy_density(double d) {
    return -(pi * pi) / (1440.0 * d * d * d);
}

enum class PfaBasis { plate, sphere };

// closed forms of the two proximity-force conventions:
//   plate basis:  -pi^3 a^2 / (1440 L^2 (L+a))
//   sphere basis: -(pi^3 a / 1440) (1/L^2 - 1/(L+a)^2)
inline EnergyResult pfa_sphere_plate(double a, double L, PfaBasis basis) {
    if (!(a > 0.0) || !(L > 0.0)) throw DomainError("pfa_sphere_plate: need a, L > 0");
    EnergyResult out;
    out.units = EnergyUnits::hbar_c_over_length;
    out.method = EnergyMethod::pfa;
    if (basis == PfaBasis::plate)
        out.value = -(pi * pi * pi) * a * a / (1440.0 * L * L * (L + a));
    else
        out.value = -(pi * pi * pi) * a / 1440.0 *
                    (1.0 / (L * L) - 1.0 / ((L + a) * (L + a)));
    return out;
}

// the same two conventions as explicit surface integrals of the
// parallel-plate density; used to validate the closed forms
inline EnergyResult pfa_proximity_integral(double a, double L, PfaBasis basis,
                                           double rel_tol = 1e-12) {
    if (!(a > 0.0) || !(L > 0.0))
        throw DomainError("pfa_proximity_integral: need a, L > 0");
    QuadResult q;
    if (basis == PfaBasis::plate) {
        // flat-side element 2 pi rho d rho below the sphere cap
        q = integrate_adaptive(
            [&](double rho) {
                const double d = L + a - std::sqrt(a * a - rho * rho);
                return 2.0 * pi * rho * plate_plate_energy_density(d);
            },
            0.0, a, rel_tol);
    } else {
        // sphere surface element 2 pi a^2 sin(theta) d theta over the
        // plate-facing hemisphere, local normal distance L + a(1 - cos)
        q = integrate_adaptive(
            [&](double th) {
                const double d = L + a * (1.0 - std::cos(th));
                return 2.0 * pi * a * a * std::sin(th) *
                       plate_plate_energy_density(d);
            },
            0.0, 0.5 * pi, rel_tol);
    }
    EnergyResult out;
    out.value = q.value;
    out.units = EnergyUnits::hbar_c_over_length;
    out.method = EnergyMethod::pfa;
    out.quad_error = q.error_estimate;
    return out;
}

enum class OrbitKind { two_spheres, sphere_plate };

// periodic-orbit energy of the bouncing trajectory and its repetitions:
//   E / (hbar c) = -(1/4 pi) sum_w 1 / (w^2 d A_w),
// d the orbit half-length and A_w = (Lambda^{w/2} - Lambda^{-w/2})^2 the
// stability factor.  repeats = 0 sums until the terms fall below rounding.
inline EnergyResult scalar_semiclassical_two_bounce(double a, double sep,
                                                    OrbitKind kind,
                                                    int repeats = 0) {
    if (!(a > 0.0)) throw DomainError("scalar_semiclassical_two_bounce: a > 0");
    if (repeats < 0) throw DomainError("scalar_semiclassical_two_bounce: repeats >= 0");
    double d = 0.0, lambda_half = 0.0;
    if (kind == OrbitKind::two_spheres) {
        const double r = sep;
        if (!(r > 2.0 * a))
            throw DomainError("scalar_semiclassical_two_bounce: need r > 2a");
        d = r - 2.0 * a;
        lambda_half = ((r - a) + std::sqrt(r * (r - 2.0 * a))) / a;
    } else {
        const double L = sep;
        if (!(L > 0.0)) throw DomainError("scalar_semiclassical_two_bounce: need L > 0");
        d = L;
        lambda_half = (std::sqrt(L) + std::sqrt(L + a)) / std::sqrt(a);
    }
    double sum = 0.0;
    const int w_hi = (repeats == 0) ? 100000 : repeats;
    for (int w = 1; w <= w_hi; ++w) {
        const double term = 1.0 / (static_cast<double>(w) * w * d *
                                   orbit_amplitude(lambda_half, w));
        sum += term;
        if (repeats == 0 && term < 1e-17 * sum) break;
    }
    EnergyResult out;
    out.value = -sum / (4.0 * pi);
    out.units = EnergyUnits::hbar_c_over_length;
    out.method = EnergyMethod::semiclassical;
    return out;
}

// --- Fermi gas at zero temperature ---

// E / mu = -(2 / k_F^2) int_0^{k_F} k n_c(k) dk, with n_c from the
// branch-tracked counting function.  The scan grid resolves the fastest
// interference scale with at least eight points per period.
inline EnergyResult fermionic_energy_exact(const GeometryQuery& g,
                                           const FermiGas& gas,
                                           double rel_tol = 1e-7,
                                           std::size_t refine_budget = 4000,
                                           int lmax_override = -1) {
    if (!(gas.k_F > 0.0)) throw DomainError("fermionic_energy_exact: k_F must be positive");
    if (gas.nu_deg < 1) throw DomainError("fermionic_energy_exact: nu_deg must be >= 1");
    if (!(rel_tol > 0.0)) throw DomainError("fermionic_energy_exact: rel_tol must be positive");

    // longest interference length in the spectrum sets the scan density
    double d_eff = 0.0;
    if (g.kind == GeometryKind::sphere_plate) {
        d_eff = 2.0 * (g.plate_gap + g.plate_radius);
    } else {
        for (const auto& pd : g.cfg.pairs) d_eff = std::max(d_eff, pd.r);
    }
    if (!(d_eff > 0.0))
        throw DomainError("fermionic_energy_exact: geometry has no pair separation");

    // freeze the cutoff where it is hardest (top of the sea)
    const double tol_ld = 1e-9;
    int L = lmax_override;
    auto probe = [&](double k, int Lc) -> LogDet {
        if (g.kind == GeometryKind::sphere_plate) {
            const double R = 2.0 * (g.plate_gap + g.plate_radius);
            return TwoSphereAxial(g.plate_radius, g.plate_radius, R, Lc)
                .logdet(cplx(k, 0.0), TwoSphereAxial::Mode::plate_odd);
        }
        return logdet_m(g.cfg, cplx(k, 0.0), Truncation{Lc, tol_ld});
    };
    if (L < 0) {
        L = 0;
        for (const double kp : {gas.k_F, 0.5 * gas.k_F}) {
            const auto got = detail_cas::converge_l(
                [&](int Lc) { return probe(kp, Lc); }, tol_ld,
                g.kind == GeometryKind::sphere_plate
                    ? 4
                    : suggest_l_max(g.cfg, kp).l_max,
                64, 4);
            L = std::max(L, got.l_max);
        }
    }

    // one reusable evaluator at the frozen cutoff
    std::unique_ptr<TwoSphereAxial> op;
    TwoSphereAxial::Mode mode = TwoSphereAxial::Mode::two_sphere;
    if (g.kind == GeometryKind::sphere_plate) {
        const double R = 2.0 * (g.plate_gap + g.plate_radius);
        op = std::make_unique<TwoSphereAxial>(g.plate_radius, g.plate_radius, R, L);
        mode = TwoSphereAxial::Mode::plate_odd;
    } else if (g.cfg.axial && g.cfg.count() == 2) {
        op = std::make_unique<TwoSphereAxial>(g.cfg.scatterers[0].radius,
                                              g.cfg.scatterers[1].radius,
                                              g.cfg.pair(0, 1).r, L);
    }
    auto eval = [&](double k) -> LogDet {
        if (op) return op->logdet(cplx(k, 0.0), mode);
        return logdet_m(g.cfg, cplx(k, 0.0), Truncation{L, tol_ld});
    };

    // scan grid: uniform with >= 8 points per oscillation period pi / d_eff,
    // plus a near-zero anchor where the principal branch is unambiguous
    const int n_pts = std::max<int>(32, static_cast<int>(std::ceil(
                                            8.0 * d_eff * gas.k_F / pi)));
    std::vector<double> grid;
    grid.reserve(static_cast<size_t>(n_pts) + 1);
    const double k0 = gas.k_F * 1e-6;
    grid.push_back(k0);
    for (int i = 1; i <= n_pts; ++i)
        grid.push_back(gas.k_F * static_cast<double>(i) / n_pts);
    const SpectralScan scan = unwrap_scan(grid, eval, refine_budget);

    // counting function at arbitrary k: principal phase re-branched by the scan
    auto n_c = [&](double k) {
        const LogDet ld = eval(k);
        return -gas.nu_deg * scan.rebranch(k, ld.imag_part) / pi;
    };
    const double to_energy = 2.0 / (gas.k_F * gas.k_F);
    QuadResult q;
    try {
        q = integrate_adaptive([&](double k) { return k * n_c(k); }, k0, gas.k_F,
                               rel_tol, 1e-14, 4000);
    } catch (const ToleranceNotMet& e) {
        throw ToleranceNotMet(-to_energy * e.best_estimate,
                              to_energy * e.achieved_error,
                              "fermionic_energy_exact: quadrature budget exhausted");
    }

    EnergyResult out;
    out.value = -to_energy * q.value;
    out.units = EnergyUnits::chemical_potential;
    out.method = EnergyMethod::exact;
    out.l_max = L;
    out.quad_error = to_energy * q.error_estimate;
    out.scan_points = static_cast<int>(scan.samples.size());
    return out;
}

// large-separation s-wave form for two spheres:
// E / mu = -nu a^2 j_1(2 (r - 2a) k_F) / (2 pi r (r - 2a))
inline EnergyResult fermionic_energy_two_sphere_approx(double a, double r,
                                                       const FermiGas& gas) {
    if (!(a > 0.0) || !(r > 2.0 * a))
        throw DomainError("fermionic_energy_two_sphere_approx: need r > 2a > 0");
    if (!(gas.k_F > 0.0))
        throw DomainError("fermionic_energy_two_sphere_approx: k_F must be positive");
    EnergyResult out;
    out.value = -gas.nu_deg * a * a *
                detail_cas::j1_spherical(2.0 * (r - 2.0 * a) * gas.k_F) /
                (2.0 * pi * r * (r - 2.0 * a));
    out.units = EnergyUnits::chemical_potential;
    out.method = EnergyMethod::swave_asymptotic;
    return out;
}

// large-separation s-wave form for a sphere facing a plate at gap L:
// E / mu = -nu a j_1(2 L k_F) / (2 pi L)
inline EnergyResult fermionic_energy_sphere_plate_approx(double a, double L,
                                                         const FermiGas& gas) {
    if (!(a > 0.0) || !(L > 0.0))
        throw DomainError("fermionic_energy_sphere_plate_approx: need a, L > 0");
    if (!(gas.k_F > 0.0))
        throw DomainError("fermionic_energy_sphere_plate_approx: k_F must be positive");
    EnergyResult out;
    out.value = -gas.nu_deg * a * detail_cas::j1_spherical(2.0 * L * gas.k_F) /
                (2.0 * pi * L);
    out.units = EnergyUnits::chemical_potential;
    out.method = EnergyMethod::swave_asymptotic;
    return out;
}

}  // namespace mscat
