#pragma once
// Inverse multiple-scattering matrix for hard (Dirichlet) spheres, its
// log-determinant with truncation control, the single-sphere phase shift,
// and the closed-form approximants for the integrated density of states.
//
// Basis ordering is scatterer-major, then l-major, then m:
//   index(j, l, m) = j (l_max+1)^2 + l (l+1) + m.
//
// Off-diagonal blocks couple sphere j (row) to sphere j' (column):
//   M_{(j l m),(j' l' m')} = i^{2m+l'-l} sqrt(4 pi (2l+1)(2l'+1)) (a_j/a_j')^2
//     * [ j_l(k a_j) / h1_{l'}(k a_j') ]
//     * sum_{l'', m''} sqrt(2l''+1) i^{l''} (l'' l' l; 0 0 0)(l'' l' l; m-m'', m'', -m)
//       h1_{l''}(k r_jj') conj(Y_{l''}^{m-m''}(rhat^{(j)})) D^{l'}_{m'', m'}(R_j^T R_j')
// with the l'' sum cut exactly by triangle selection.  For spheres on the
// z-axis this is block-diagonal in m, and on the positive imaginary axis it
// reduces to real modified-Bessel arithmetic; both specializations are
// implemented and cross-checked against the general assembly.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core.hpp"
#include "geometry.hpp"
#include "linalg.hpp"
#include "specfun.hpp"
#include "unwrap.hpp"

namespace mscat {

enum class DosProvenance { exact, swave, semiclassical };

struct IntegratedDos {
    double k = 0.0;
    double n_c = 0.0;
    DosProvenance provenance = DosProvenance::exact;
};

enum class MSymmetry { full, axial_m_blocks };

struct MMatrix {
    cplx k;
    Truncation truncation;
    MatrixZ blocks;
    MSymmetry symmetry = MSymmetry::full;
    int n_scatterers = 0;

    int dim() const { return blocks.n; }
    static int basis_index(int j, int l, int m, int l_max) {
        return j * (l_max + 1) * (l_max + 1) + l * (l + 1) + m;
    }
};

struct TruncationNoConvergence : NoConvergence {
    std::vector<std::pair<int, double>> trace;  // (l_max, delta) iterates
    TruncationNoConvergence(int order, double delta,
                            std::vector<std::pair<int, double>> tr,
                            const std::string& what)
        : NoConvergence(order, delta, what), trace(std::move(tr)) {}
};

namespace detail_scat {

// memo for 3j symbols; keys pack six small integers.  The map persists per
// thread so successive assemblies (cutoff stepping, repeated scans) reuse
// earlier evaluations instead of recomputing them.
struct ThreeJMemo {
    std::unordered_map<std::uint64_t, double>& map;

    ThreeJMemo() : map(thread_cache()) {}

    static std::unordered_map<std::uint64_t, double>& thread_cache() {
        static thread_local std::unordered_map<std::uint64_t, double> cache;
        return cache;
    }

    static std::uint64_t key(int l1, int l2, int l3, int m1, int m2) {
        auto u = [](int v) { return static_cast<std::uint64_t>(v + 128) & 0x3ff; };
        return (u(l1) << 40) | (u(l2) << 30) | (u(l3) << 20) | (u(m1) << 10) | u(m2);
    }

    double get(int l1, int l2, int l3, int m1, int m2, int m3) {
        const auto k = key(l1, l2, l3, m1, m2);
        auto it = map.find(k);
        if (it != map.end()) return it->second;
        const double v = specfun::wigner_3j(l1, l2, l3, m1, m2, m3);
        map.emplace(k, v);
        return v;
    }
};

// small dense real matrix in extended precision, for the rotation-axis
// blocks whose intermediate sums overflow double near kappa -> 0
struct MatrixL {
    int n = 0;
    std::vector<long double> a;
    explicit MatrixL(int n_) : n(n_), a(static_cast<size_t>(n_) * n_, 0.0L) {}
    long double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const long double& at(int i, int j) const {
        return a[static_cast<size_t>(i) * n + j];
    }
};

// ln |det| and sign via partially pivoted elimination, all in long double
inline LogDet logdet_ext(MatrixL m) {
    const int n = m.n;
    long double re = 0.0L;
    int sign = 1;
    long double pmax = 0.0L, pmin = std::numeric_limits<long double>::max();
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int i = c + 1; i < n; ++i)
            if (std::fabs(m.at(i, c)) > std::fabs(m.at(piv, c))) piv = i;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m.at(c, j), m.at(piv, j));
            sign = -sign;
        }
        const long double p = m.at(c, c);
        if (p == 0.0L || !std::isfinite(static_cast<double>(std::log(std::fabs(p)))))
            throw SingularMatrixError("logdet_ext: zero or non-finite pivot");
        pmax = std::max(pmax, std::fabs(p));
        pmin = std::min(pmin, std::fabs(p));
        re += std::log(std::fabs(p));
        if (p < 0.0L) sign = -sign;
        for (int i = c + 1; i < n; ++i) {
            const long double f = m.at(i, c) / p;
            if (f == 0.0L) continue;
            for (int j = c + 1; j < n; ++j) m.at(i, j) -= f * m.at(c, j);
        }
    }
    return {static_cast<double>(re), sign > 0 ? 0.0 : pi,
            static_cast<double>(pmax / pmin)};
}

// complex value in extended precision with spelled-out arithmetic;
// std::complex<long double> products go through a libgcc call, which would
// dominate the block contractions
struct cplxl {
    long double re = 0.0L, im = 0.0L;
};
inline cplxl operator+(cplxl a, cplxl b) { return {a.re + b.re, a.im + b.im}; }
inline cplxl operator-(cplxl a, cplxl b) { return {a.re - b.re, a.im - b.im}; }
inline cplxl operator*(cplxl a, cplxl b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline cplxl operator*(long double a, cplxl b) { return {a * b.re, a * b.im}; }
// Smith's division, stable over the whole exponent range
inline cplxl operator/(cplxl a, cplxl b) {
    if (std::fabs(b.re) >= std::fabs(b.im)) {
        const long double t = b.im / b.re, d = b.re + b.im * t;
        return {(a.re + a.im * t) / d, (a.im - a.re * t) / d};
    }
    const long double t = b.re / b.im, d = b.re * t + b.im;
    return {(a.re * t + a.im) / d, (a.im * t - a.re) / d};
}

struct MatrixLZ {
    int n = 0;
    std::vector<cplxl> a;
    explicit MatrixLZ(int n_) : n(n_), a(static_cast<size_t>(n_) * n_) {}
    cplxl& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const cplxl& at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

// complex twin of logdet_ext; conventions mirror logdet_complex
inline LogDet logdet_ext_z(MatrixLZ m) {
    const int n = m.n;
    if (n == 0) return {};
    long double log_mag = 0.0L, phase = 0.0L;
    long double piv_max = 0.0L, piv_min = std::numeric_limits<long double>::max();
    int swaps = 0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        long double best = std::hypot(m.at(col, col).re, m.at(col, col).im);
        for (int r = col + 1; r < n; ++r) {
            const long double v = std::hypot(m.at(r, col).re, m.at(r, col).im);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > 0.0L) || !std::isfinite(best))
            throw SingularMatrixError("logdet_ext_z: zero or non-finite pivot");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(m.at(col, j), m.at(piv, j));
            ++swaps;
        }
        const cplxl d = m.at(col, col);
        const long double ad = std::hypot(d.re, d.im);
        log_mag += std::log(ad);
        phase += std::atan2(d.im, d.re);
        piv_max = std::max(piv_max, ad);
        piv_min = std::min(piv_min, ad);
        for (int r = col + 1; r < n; ++r) {
            const cplxl f = m.at(r, col) / d;
            if (f.re == 0.0L && f.im == 0.0L) continue;
            for (int j = col + 1; j < n; ++j)
                m.at(r, j) = m.at(r, j) - f * m.at(col, j);
        }
    }
    if (swaps & 1) phase += pi;
    return {static_cast<double>(log_mag), wrap_to_pi(static_cast<double>(phase)),
            static_cast<double>(piv_max / piv_min)};
}

}  // namespace detail_scat

// Couplings between two spheres on the z-axis.  The tables are k-independent
// and exact-rational at the 3j level; one instance serves a whole scan.
class TwoSphereAxial {
  public:
    enum class Mode {
        two_sphere,  // det over both spheres (Schur form per m block)
        plate_odd    // odd-parity sector of a sphere and its mirror image
    };

    TwoSphereAxial(double a1, double a2, double r, int l_max)
        : a1_(a1), a2_(a2), r_(r), l_max_(l_max) {
        if (!(a1 > 0.0) || !(a2 > 0.0)) throw DomainError("TwoSphereAxial: radii > 0");
        if (!(r > a1 + a2)) throw DomainError("TwoSphereAxial: spheres overlap");
        if (l_max < 0) throw DomainError("TwoSphereAxial: l_max < 0");
        build_tables();
    }

    int l_max() const { return l_max_; }

    // ln det of the m-resolved determinant, all m sectors combined;
    // purely imaginary k takes the real modified-Bessel route
    LogDet logdet(cplx k, Mode mode = Mode::two_sphere) const {
        if (mode == Mode::plate_odd && a1_ != a2_)
            throw DomainError("TwoSphereAxial: image construction needs equal radii");
        if (k.real() == 0.0 && k.imag() > 0.0) return logdet_imag(k.imag(), mode);
        if (k.imag() == 0.0 && k.real() > 0.0) return logdet_real(k.real(), mode);
        throw DomainError("TwoSphereAxial: k must be positive real or imaginary");
    }

  private:
    double a1_, a2_, r_;
    int l_max_;
    // c(m, l, l', l'') = (2l''+1) (l'' l' l;000) (l'' l' l;0 m -m), packed
    // contiguously with l'' running over the parity-even triangle range
    std::vector<double> coeff_;
    std::vector<std::size_t> offset_;  // index of (m,l,l') runs in coeff_

    std::size_t run_index(int m, int l, int lp) const {
        const std::size_t L = static_cast<std::size_t>(l_max_) + 1;
        return (static_cast<std::size_t>(m) * L + static_cast<std::size_t>(l)) * L +
               static_cast<std::size_t>(lp);
    }

    void build_tables() {
        const int L = l_max_;
        offset_.assign(static_cast<size_t>(L + 1) * (L + 1) * (L + 1) + 1, 0);
        std::size_t total = 0;
        for (int m = 0; m <= L; ++m)
            for (int l = m; l <= L; ++l)
                for (int lp = m; lp <= L; ++lp) {
                    offset_[run_index(m, l, lp)] = total;
                    total += static_cast<std::size_t>((l + lp - std::abs(l - lp)) / 2 + 1);
                }
        offset_.back() = total;
        coeff_.assign(total, 0.0);
        detail_scat::ThreeJMemo memo;
        for (int m = 0; m <= L; ++m)
            for (int l = m; l <= L; ++l)
                for (int lp = m; lp <= L; ++lp) {
                    std::size_t at = offset_[run_index(m, l, lp)];
                    for (int lpp = std::abs(l - lp); lpp <= l + lp; lpp += 2) {
                        const double w0 = memo.get(lpp, lp, l, 0, 0, 0);
                        const double wm = memo.get(lpp, lp, l, 0, m, -m);
                        coeff_[at++] = (2.0 * lpp + 1.0) * w0 * wm;
                    }
                }
    }

    double coeff(int m, int l, int lp, int lpp) const {
        const int lo = std::abs(l - lp);
        if (lpp < lo || lpp > l + lp || ((lpp - lo) & 1)) return 0.0;
        return coeff_[offset_[run_index(m, l, lp)] +
                      static_cast<std::size_t>((lpp - lo) / 2)];
    }

    // real positive k: complex per-m blocks.  Extended precision for the
    // same reason as the imaginary axis: y_{l''}(k r) in the l'' sums
    // overflows double near k -> 0 at large cutoff while the assembled
    // entries stay bounded.
    LogDet logdet_real(double k, Mode mode) const {
        using detail_scat::cplxl;
        const int L = l_max_;
        const long double x = static_cast<long double>(k);
        std::vector<long double> j1, y1, j2, y2, jr, yr;
        specfun::sph_jy_ext(L, x * a1_, j1, y1);
        specfun::sph_jy_ext(L, x * a2_, j2, y2);
        specfun::sph_jy_ext(2 * L, x * r_, jr, yr);
        const long double ra = static_cast<long double>(a1_) / a2_;

        // i^q z for q >= 0
        const auto spin = [](int q, cplxl z) -> cplxl {
            switch (q & 3) {
                case 0: return z;
                case 1: return {-z.im, z.re};
                case 2: return {-z.re, -z.im};
                default: return {z.im, -z.re};
            }
        };

        double re = 0.0, ph = 0.0;
        double growth = 1.0;
        for (int m = 0; m <= L; ++m) {
            const int nb = L - m + 1;
            detail_scat::MatrixLZ B12(nb), B21(nb);
            for (int l = m; l <= L; ++l)
                for (int lp = m; lp <= L; ++lp) {
                    cplxl s{};
                    for (int lpp = std::abs(l - lp); lpp <= l + lp; lpp += 2) {
                        const long double cc = coeff(m, l, lp, lpp);
                        const cplxl h{jr[static_cast<size_t>(lpp)],
                                      yr[static_cast<size_t>(lpp)]};
                        s = s + cc * spin(lpp, h);
                    }
                    const long double root =
                        std::sqrt((2.0L * l + 1.0L) * (2.0L * lp + 1.0L));
                    const int q = 2 * m + lp - l + 4 * L;  // i^{2m+lp-l}, kept >= 0
                    const double parity = ((l + lp) & 1) ? -1.0 : 1.0;
                    const cplxl h2{j2[static_cast<size_t>(lp)],
                                   y2[static_cast<size_t>(lp)]};
                    const cplxl h1{j1[static_cast<size_t>(lp)],
                                   y1[static_cast<size_t>(lp)]};
                    B12.at(l - m, lp - m) =
                        spin(q, (root * ra * ra) *
                                    ((cplxl{j1[static_cast<size_t>(l)], 0.0L} / h2) * s));
                    B21.at(l - m, lp - m) =
                        spin(q, (parity * root / (ra * ra)) *
                                    ((cplxl{j2[static_cast<size_t>(l)], 0.0L} / h1) * s));
                }
            const LogDet bl = block_logdet_ext_z(B12, B21, mode);
            const double w = (m == 0) ? 1.0 : 2.0;  // +-m sectors are identical
            re += w * bl.real_part;
            ph += w * bl.imag_part;
            growth = std::max(growth, bl.pivot_growth);
        }
        return {re, wrap_to_pi(ph), growth};
    }

    // positive imaginary k: everything real, with explicit screening
    // e^{-kappa gap} in the entries.  The assembled entries stay bounded as
    // kappa -> 0, but the intermediate l'' sums span the full modified-Bessel
    // range and overflow double at large cutoff, so the whole block path runs
    // in long double.
    LogDet logdet_imag(double kappa, Mode mode) const {
        const int L = l_max_;
        const long double x = static_cast<long double>(kappa);
        std::vector<long double> i1, k1, i2, k2, ir, kr;
        specfun::sph_ik_scaled_ext(L, x * a1_, i1, k1);
        specfun::sph_ik_scaled_ext(L, x * a2_, i2, k2);
        specfun::sph_ik_scaled_ext(2 * L, x * r_, ir, kr);
        const long double screen12 = std::exp(-x * (r_ - a1_ - a2_));
        const long double ra = static_cast<long double>(a1_) / a2_;

        double re = 0.0, ph = 0.0, growth = 1.0;
        for (int m = 0; m <= L; ++m) {
            const int nb = L - m + 1;
            detail_scat::MatrixL B12(nb), B21(nb);
            for (int l = m; l <= L; ++l)
                for (int lp = m; lp <= L; ++lp) {
                    long double s = 0.0L;
                    for (int lpp = std::abs(l - lp); lpp <= l + lp; lpp += 2)
                        s += static_cast<long double>(coeff(m, l, lp, lpp)) *
                             kr[static_cast<size_t>(lpp)];
                    const long double root =
                        std::sqrt((2.0L * l + 1.0L) * (2.0L * lp + 1.0L));
                    const long double sign = ((m + lp) & 1) ? -1.0L : 1.0L;
                    const long double parity = ((l + lp) & 1) ? -1.0L : 1.0L;
                    B12.at(l - m, lp - m) =
                        sign * root * ra * ra *
                        (i1[static_cast<size_t>(l)] / k2[static_cast<size_t>(lp)]) *
                        s * screen12;
                    B21.at(l - m, lp - m) =
                        parity * sign * root / (ra * ra) *
                        (i2[static_cast<size_t>(l)] / k1[static_cast<size_t>(lp)]) *
                        s * screen12;
                }
            const LogDet bl = block_logdet_ext(B12, B21, mode);
            const double w = (m == 0) ? 1.0 : 2.0;
            re += w * bl.real_part;
            ph += w * bl.imag_part;
            growth = std::max(growth, bl.pivot_growth);
        }
        return {re, wrap_to_pi(ph), growth};
    }

    // two_sphere: det [[I, B12],[B21, I]] = det(I - B21 B12)  (Schur)
    // plate_odd:  det(I - S B12) with the mirror parity S_lm = (-1)^{l+m};
    //             rows carry l = m + i, so within a block S is diag((-1)^i).
    //             The sector choice is pinned by the proximity-force limit.
    static LogDet block_logdet_ext_z(const detail_scat::MatrixLZ& B12,
                                     const detail_scat::MatrixLZ& B21, Mode mode) {
        using detail_scat::cplxl;
        const int nb = B12.n;
        detail_scat::MatrixLZ c(nb);
        if (mode == Mode::two_sphere) {
            for (int i = 0; i < nb; ++i)
                for (int jj = 0; jj < nb; ++jj) {
                    cplxl acc{};
                    for (int t = 0; t < nb; ++t)
                        acc = acc + B21.at(i, t) * B12.at(t, jj);
                    c.at(i, jj) = cplxl{i == jj ? 1.0L : 0.0L, 0.0L} - acc;
                }
        } else {
            for (int i = 0; i < nb; ++i) {
                const long double s = (i & 1) ? -1.0L : 1.0L;
                for (int jj = 0; jj < nb; ++jj)
                    c.at(i, jj) =
                        cplxl{i == jj ? 1.0L : 0.0L, 0.0L} - s * B12.at(i, jj);
            }
        }
        return detail_scat::logdet_ext_z(std::move(c));
    }

    // same contraction with real entries, for the imaginary axis
    static LogDet block_logdet_ext(const detail_scat::MatrixL& B12,
                                   const detail_scat::MatrixL& B21, Mode mode) {
        const int nb = B12.n;
        detail_scat::MatrixL c(nb);
        if (mode == Mode::two_sphere) {
            for (int i = 0; i < nb; ++i)
                for (int jj = 0; jj < nb; ++jj) {
                    long double acc = 0.0L;
                    for (int t = 0; t < nb; ++t) acc += B21.at(i, t) * B12.at(t, jj);
                    c.at(i, jj) = (i == jj ? 1.0L : 0.0L) - acc;
                }
        } else {
            for (int i = 0; i < nb; ++i) {
                const long double s = (i & 1) ? -1.0L : 1.0L;
                for (int jj = 0; jj < nb; ++jj)
                    c.at(i, jj) = (i == jj ? 1.0L : 0.0L) - s * B12.at(i, jj);
            }
        }
        return detail_scat::logdet_ext(std::move(c));
    }
};

namespace detail_scat {

// largest full matrix we are willing to assemble: n (l_max+1)^2 complex rows
inline constexpr int dim_guard = 20000;

struct SphereTables {
    std::vector<cplx> j;   // j_l(k a)
    std::vector<cplx> h1;  // h1_l(k a)
};

struct PairTables {
    std::vector<cplx> h1r;    // h1_{l''}(k r_jj'), l'' <= 2 l_max
    std::vector<cplx> conjY;  // conj(Y_{l''}^{mu}(rhat in j's frame)), packed l''(l''+1)+mu
    bool rotated = false;
    std::vector<std::vector<cplx>> D;  // per l', (2l'+1)^2 row-major (m'', m')
};

}  // namespace detail_scat

// Full matrix in the (j, l, m) basis.  Diagonal super-blocks are exactly the
// identity; off-diagonal blocks follow the entry formula at the top of this
// header.  Works for any sphere count and arbitrary per-sphere frames.
inline MMatrix assemble_m(const Configuration& cfg, cplx k, const Truncation& tr) {
    const int n = cfg.count();
    const int L = tr.l_max;
    if (L < 0) throw DomainError("assemble_m: l_max < 0");
    const int per = (L + 1) * (L + 1);
    const int dim = n * per;
    if (dim > detail_scat::dim_guard)
        throw DomainError("assemble_m: matrix dimension " + std::to_string(dim) +
                          " exceeds the assembly guard");
    if (!(std::abs(k) > 0.0)) throw DomainError("assemble_m: k must be nonzero");

    std::vector<detail_scat::SphereTables> sph(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const cplx x = k * cfg.scatterers[static_cast<size_t>(j)].radius;
        sph[static_cast<size_t>(j)].j = specfun::spherical_bessel_j(L, x);
        sph[static_cast<size_t>(j)].h1 = specfun::spherical_hankel1(L, x);
    }

    std::vector<detail_scat::PairTables> pt(cfg.pairs.size());
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        const PairData& pd = cfg.pairs[p];
        auto& t = pt[p];
        t.h1r = specfun::spherical_hankel1(2 * L, k * pd.r);
        t.conjY.assign(static_cast<size_t>((2 * L + 1) * (2 * L + 1)), cplx(0.0));
        for (int lpp = 0; lpp <= 2 * L; ++lpp)
            for (int mu = -lpp; mu <= lpp; ++mu)
                t.conjY[static_cast<size_t>(lpp * (lpp + 1) + mu)] =
                    std::conj(specfun::spherical_harmonic(lpp, mu, pd.dir_local));
        t.rotated = (pd.euler[0] != 0.0 || pd.euler[1] != 0.0 || pd.euler[2] != 0.0);
        if (t.rotated) {
            t.D.resize(static_cast<size_t>(L + 1));
            for (int lp = 0; lp <= L; ++lp)
                t.D[static_cast<size_t>(lp)] = specfun::wigner_rotation(
                    lp, pd.euler[0], pd.euler[1], pd.euler[2]);
        }
    }

    MMatrix out;
    out.k = k;
    out.truncation = tr;
    out.symmetry = cfg.axial ? MSymmetry::axial_m_blocks : MSymmetry::full;
    out.n_scatterers = n;
    out.blocks = MatrixZ::identity(dim);

    detail_scat::ThreeJMemo memo;
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        const PairData& pd = cfg.pairs[p];
        const auto& t = pt[p];
        const int j = pd.j, jp = pd.jp;
        const double aj = cfg.scatterers[static_cast<size_t>(j)].radius;
        const double ajp = cfg.scatterers[static_cast<size_t>(jp)].radius;
        const double ratio2 = (aj / ajp) * (aj / ajp);
        const int row0 = j * per, col0 = jp * per;
        for (int l = 0; l <= L; ++l)
            for (int m = -l; m <= l; ++m) {
                const int row = row0 + l * (l + 1) + m;
                for (int lp = 0; lp <= L; ++lp) {
                    // radial prefactor shared by the whole (l, lp) run of m'
                    const cplx pref = ipow(2 * m + lp - l) *
                                      std::sqrt(4.0 * pi * (2.0 * l + 1.0) *
                                                (2.0 * lp + 1.0)) *
                                      ratio2 *
                                      (sph[static_cast<size_t>(j)].j[static_cast<size_t>(l)] /
                                       sph[static_cast<size_t>(jp)].h1[static_cast<size_t>(lp)]);
                    for (int mp = -lp; mp <= lp; ++mp) {
                        const int col = col0 + lp * (lp + 1) + mp;
                        cplx sum = 0.0;
                        for (int lpp = std::abs(l - lp); lpp <= l + lp; lpp += 2) {
                            const double w0 = memo.get(lpp, lp, l, 0, 0, 0);
                            if (w0 == 0.0) continue;
                            const cplx rad = std::sqrt(2.0 * lpp + 1.0) * ipow(lpp) *
                                             w0 * t.h1r[static_cast<size_t>(lpp)];
                            if (!t.rotated) {
                                const int mu = m - mp;
                                if (std::abs(mu) > lpp) continue;
                                const double w =
                                    memo.get(lpp, lp, l, mu, mp, -m);
                                if (w == 0.0) continue;
                                sum += rad * w *
                                       t.conjY[static_cast<size_t>(lpp * (lpp + 1) + mu)];
                            } else {
                                const auto& Dl = t.D[static_cast<size_t>(lp)];
                                cplx inner = 0.0;
                                for (int mpp = -lp; mpp <= lp; ++mpp) {
                                    const int mu = m - mpp;
                                    if (std::abs(mu) > lpp) continue;
                                    const double w =
                                        memo.get(lpp, lp, l, mu, mpp, -m);
                                    if (w == 0.0) continue;
                                    inner += w *
                                             t.conjY[static_cast<size_t>(lpp * (lpp + 1) + mu)] *
                                             Dl[static_cast<size_t>((mpp + lp) * (2 * lp + 1) +
                                                                    (mp + lp))];
                                }
                                sum += rad * inner;
                            }
                        }
                        out.blocks.at(row, col) = pref * sum;
                    }
                }
            }
    }
    return out;
}

// ln det M at one k; axial two-sphere configurations take the m-block route
inline LogDet logdet_m(const Configuration& cfg, cplx k, const Truncation& tr) {
    if (cfg.axial && cfg.count() == 2) {
        const TwoSphereAxial op(cfg.scatterers[0].radius, cfg.scatterers[1].radius,
                                cfg.pair(0, 1).r, tr.l_max);
        return op.logdet(k);
    }
    return logdet_complex(std::move(assemble_m(cfg, k, tr).blocks));
}

struct ConvergedLogDet {
    LogDet ld;
    int l_max = 0;
    std::vector<std::pair<int, double>> trace;  // (l_max, delta vs previous)
};

// Steps the cutoff until ln det moves less than tol in both real part and
// branch-wrapped phase.  Throws TruncationNoConvergence with the iterate
// trace if the cap is hit first.
inline ConvergedLogDet logdet_m_converged(const Configuration& cfg, cplx k,
                                          double tol, int l_max_start = -1,
                                          int l_max_cap = 64, int step = 4) {
    if (!(tol > 0.0)) throw DomainError("logdet_m_converged: tol must be positive");
    if (step < 1) throw DomainError("logdet_m_converged: step must be >= 1");
    int L = (l_max_start >= 0) ? l_max_start : suggest_l_max(cfg, std::abs(k)).l_max;
    if (L > l_max_cap) L = l_max_cap;
    std::vector<std::pair<int, double>> trace;
    LogDet prev = logdet_m(cfg, k, Truncation{L, tol});
    double delta = std::numeric_limits<double>::infinity();
    while (L + step <= l_max_cap) {
        const int L2 = L + step;
        const LogDet cur = logdet_m(cfg, k, Truncation{L2, tol});
        delta = std::abs(cur.real_part - prev.real_part) +
                std::abs(wrap_to_pi(cur.imag_part - prev.imag_part));
        trace.emplace_back(L2, delta);
        if (delta < tol) return {cur, L2, std::move(trace)};
        prev = cur;
        L = L2;
    }
    throw TruncationNoConvergence(
        L, delta, std::move(trace),
        "logdet_m_converged: no convergence by l_max = " + std::to_string(L));
}

struct DosScan {
    SpectralScan scan;              // unwrapped ln det phases over the grid
    std::vector<IntegratedDos> dos; // n_c(k) = -phase/pi at the grid points
    int l_max = 0;                  // cutoff used across the whole scan
};

// Counting function over a k grid.  The cutoff is frozen at the value that
// converges the two hardest probes (top and middle of the grid), then the
// phase is unwrapped across the grid with adaptive refinement.  A
// non-negative lmax_override skips the probing and pins the cutoff.
inline DosScan integrated_dos_exact(const Configuration& cfg,
                                    const std::vector<double>& grid,
                                    double tol = 1e-8, int nu_deg = 1,
                                    std::size_t refine_budget = 4000,
                                    int lmax_override = -1) {
    if (grid.size() < 2) throw DomainError("integrated_dos_exact: need >= 2 grid points");
    if (nu_deg < 1) throw DomainError("integrated_dos_exact: nu_deg must be >= 1");
    int L = lmax_override;
    if (L < 0) {
        const auto digest_hi = logdet_m_converged(cfg, cplx(grid.back(), 0.0), tol);
        const auto digest_mid =
            logdet_m_converged(cfg, cplx(grid[grid.size() / 2], 0.0), tol);
        L = std::max(digest_hi.l_max, digest_mid.l_max);
    }

    DosScan out;
    out.l_max = L;
    if (cfg.axial && cfg.count() == 2) {
        const TwoSphereAxial op(cfg.scatterers[0].radius, cfg.scatterers[1].radius,
                                cfg.pair(0, 1).r, L);
        out.scan = unwrap_scan(
            grid, [&](double kk) { return op.logdet(cplx(kk, 0.0)); }, refine_budget);
    } else {
        out.scan = unwrap_scan(
            grid,
            [&](double kk) { return logdet_m(cfg, cplx(kk, 0.0), Truncation{L, tol}); },
            refine_budget);
    }
    out.dos.reserve(out.scan.samples.size());
    for (const auto& s : out.scan.samples)
        out.dos.push_back({s.k, -static_cast<double>(nu_deg) * s.phase / pi,
                           DosProvenance::exact});
    return out;
}

// Sum over l of (2l+1) delta_l for one hard sphere, with each delta_l taken
// continuous in k from threshold (delta_l(0) = 0).  delta_0 = -ka exactly.
inline double single_sphere_phase_shift(double a, double k, int l_max) {
    if (!(a > 0.0)) throw DomainError("single_sphere_phase_shift: a must be positive");
    if (!(k > 0.0)) throw DomainError("single_sphere_phase_shift: k must be positive");
    if (l_max < 0) throw DomainError("single_sphere_phase_shift: l_max < 0");
    const double x_end = k * a;
    // delta_l = -(arg h1_l(x) + pi/2) with arg tracked continuously from
    // x -> 0+, where arg h1_l -> -pi/2; steps keep every increment within
    // a branch (|d arg/dx| <= ~1 for a hard sphere)
    const int steps = std::max(4, static_cast<int>(std::ceil(x_end / 0.25)));
    std::vector<double> theta(static_cast<size_t>(l_max) + 1, -0.5 * pi);
    for (int s = 1; s <= steps; ++s) {
        const double x = x_end * static_cast<double>(s) / steps;
        const auto h = specfun::spherical_hankel1(l_max, cplx(x, 0.0));
        for (int l = 0; l <= l_max; ++l) {
            const double principal = std::atan2(h[static_cast<size_t>(l)].imag(),
                                                h[static_cast<size_t>(l)].real());
            theta[static_cast<size_t>(l)] +=
                wrap_to_pi(principal - theta[static_cast<size_t>(l)]);
        }
    }
    double total = 0.0;
    for (int l = 0; l <= l_max; ++l)
        total += (2.0 * l + 1.0) * (-(theta[static_cast<size_t>(l)] + 0.5 * pi));
    return total;
}

// --- closed-form approximants for the two-sphere counting function ---

// s-wave channel only: n_c = nu a^2/(pi r^2) sin(2(r-a)k)
inline IntegratedDos nc_swave_two_spheres(double a, double r, double k,
                                          int nu_deg = 1) {
    if (!(a > 0.0) || !(r > 2.0 * a)) throw DomainError("nc_swave_two_spheres: need r > 2a > 0");
    if (nu_deg < 1) throw DomainError("nc_swave_two_spheres: nu_deg must be >= 1");
    const double v = nu_deg * (a * a) / (pi * r * r) * std::sin(2.0 * (r - a) * k);
    return {k, v, DosProvenance::swave};
}

// stability factor of the w-fold repetition of the bouncing orbit:
// A_w = (Lambda^{w/2} - Lambda^{-w/2})^2 for stretch factor Lambda
inline double orbit_amplitude(double lambda_half, int w) {
    const double t = std::pow(lambda_half, w) - std::pow(lambda_half, -w);
    return t * t;
}

// periodic-orbit sum n_c = (nu/pi) sum_w sin(2 w (r-2a) k) / (w A_w);
// repeats = 1 reduces to nu a^2/(4 pi r (r-2a)) sin(2(r-2a)k)
inline IntegratedDos nc_semiclassical_two_spheres(double a, double r, double k,
                                                  int nu_deg = 1, int repeats = 1) {
    if (!(a > 0.0) || !(r > 2.0 * a))
        throw DomainError("nc_semiclassical_two_spheres: need r > 2a > 0");
    if (nu_deg < 1 || repeats < 1)
        throw DomainError("nc_semiclassical_two_spheres: nu_deg and repeats must be >= 1");
    const double d = r - 2.0 * a;
    const double lambda_half = ((r - a) + std::sqrt(r * (r - 2.0 * a))) / a;
    double v = 0.0;
    for (int w = 1; w <= repeats; ++w)
        v += std::sin(2.0 * w * d * k) / (w * orbit_amplitude(lambda_half, w));
    v *= nu_deg / pi;
    return {k, v, DosProvenance::semiclassical};
}

// s-wave counting function for any arrangement: an n x n determinant with
// amplitudes f_j = sin(k a_j) e^{-i k a_j} / k
inline IntegratedDos nc_swave_n_spheres(const Configuration& cfg, double k,
                                        int nu_deg = 1) {
    if (!(k > 0.0)) throw DomainError("nc_swave_n_spheres: k must be positive");
    if (nu_deg < 1) throw DomainError("nc_swave_n_spheres: nu_deg must be >= 1");
    const int n = cfg.count();
    MatrixZ m = MatrixZ::identity(n);
    for (const auto& pd : cfg.pairs) {
        const double aj = cfg.scatterers[static_cast<size_t>(pd.j)].radius;
        const cplx f = std::sin(k * aj) * std::exp(cplx(0.0, -k * aj)) / k;
        m.at(pd.j, pd.jp) = -f * std::exp(cplx(0.0, k * pd.r)) / pd.r;
    }
    const LogDet ld = logdet_complex(std::move(m));
    return {k, -nu_deg * ld.imag_part / pi, DosProvenance::swave};
}

}  // namespace mscat
