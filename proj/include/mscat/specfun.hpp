#pragma once
// Spherical Bessel/Hankel functions, exponentially scaled modified variants,
// Wigner 3j symbols, spherical harmonics, and Wigner rotation matrices.
//
// Conventions pinned here and relied on everywhere else:
//   - Hankel: h1_l = j_l + i y_l, seed h1_0(x) = -i e^{ix}/x.
//   - Harmonics: orthonormal, Condon-Shortley phase, Y_l^{-m} = (-1)^m conj(Y_l^m).
//   - Rotations: z-y-z Euler angles with D^l_{m',m} = e^{-i m' a} d^l_{m',m}(b) e^{-i m g}
//     and the transformation law Y_l^m(R^{-1} n) = sum_{m'} D^l_{m',m}(R) Y_l^{m'}(n).
//   - On the positive imaginary axis, j_l(i k) = i^l i_l(k) and
//     h1_l(i k) = -(2/pi) i^{-l} k_l(k); i^l h1_l(i k) is real.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "core.hpp"

namespace mscat::specfun {

namespace detail {

inline int miller_start(int l_max, double abs_x) {
    double top = std::max(static_cast<double>(l_max), abs_x);
    return static_cast<int>(std::ceil(top)) + 16 +
           static_cast<int>(std::ceil(std::sqrt(40.0 * std::max(1, l_max))));
}

// downward recurrence for the subdominant solution, generic over real/complex.
// rec: f_{l-1} = coeff(l) * f_l - sign * f_{l+1} with sign=+1 (ordinary) or -1 (modified).
template <class T>
std::vector<T> miller_downward(int l_max, int start, T inv_x, double sign) {
    std::vector<T> out(static_cast<size_t>(l_max) + 1);
    T fp{}, fc = T(1e-150);
    for (int l = start; l >= 1; --l) {
        T fm = static_cast<double>(2 * l + 1) * inv_x * fc - sign * fp;
        fp = fc;
        fc = fm;
        if (l - 1 <= l_max) out[l - 1] = fc;
        if (l - 1 < l_max) out[l] = fp;
        if (std::abs(fc) > 1e250) {  // rescale to dodge overflow
            const double inv = 1e-250;
            fc *= inv;
            fp *= inv;
            for (int i = l - 1; i <= l_max; ++i) out[i] *= inv;
        }
    }
    return out;
}

inline void require_positive(double x, const char* who) {
    if (!(x > 0.0)) throw DomainError(std::string(who) + ": requires x > 0");
}

}  // namespace detail

// j_l(x) for real x >= 0, l = 0..l_max
inline std::vector<double> sph_j_real(int l_max, double x) {
    if (l_max < 0) throw DomainError("sph_j_real: l_max < 0");
    std::vector<double> j(static_cast<size_t>(l_max) + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }
    if (x < 0.0) throw DomainError("sph_j_real: x < 0");
    const double j0 = std::sin(x) / x;
    if (l_max == 0) {
        j[0] = j0;
        return j;
    }
    const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    if (x >= static_cast<double>(l_max)) {  // oscillatory regime: upward is safe
        j[0] = j0;
        j[1] = j1;
        for (int l = 1; l < l_max; ++l)
            j[l + 1] = (2.0 * l + 1.0) / x * j[l] - j[l - 1];
        return j;
    }
    auto u = detail::miller_downward<double>(l_max, detail::miller_start(l_max, x),
                                             1.0 / x, 1.0);
    // anchor on whichever seed is better conditioned
    const double scale = (std::abs(j0) >= std::abs(j1)) ? j0 / u[0] : j1 / u[1];
    for (auto& v : u) v *= scale;
    return u;
}

// y_l(x) for real x > 0; upward recurrence, y is the dominant solution
inline std::vector<double> sph_y_real(int l_max, double x) {
    if (l_max < 0) throw DomainError("sph_y_real: l_max < 0");
    detail::require_positive(x, "sph_y_real");
    std::vector<double> y(static_cast<size_t>(l_max) + 1);
    y[0] = -std::cos(x) / x;
    if (l_max >= 1) y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
    for (int l = 1; l < l_max; ++l)
        y[l + 1] = (2.0 * l + 1.0) / x * y[l] - y[l - 1];
    return y;
}

// j_l(x), complex argument with Im x >= 0
inline std::vector<cplx> spherical_bessel_j(int l_max, cplx x) {
    if (l_max < 0) throw DomainError("spherical_bessel_j: l_max < 0");
    if (x.imag() < 0.0) throw DomainError("spherical_bessel_j: Im x < 0");
    if (x.imag() == 0.0) {
        auto jr = sph_j_real(l_max, std::abs(x.real()));
        std::vector<cplx> j(jr.size());
        // j_l(-x) = (-1)^l j_l(x)
        const bool neg = x.real() < 0.0;
        for (int l = 0; l <= l_max; ++l)
            j[l] = (neg && (l & 1)) ? cplx(-jr[l]) : cplx(jr[l]);
        return j;
    }
    if (x.imag() > 700.0)
        throw DomainError("spherical_bessel_j: Im x too large, result overflows");
    if (std::abs(x) == 0.0) throw DomainError("spherical_bessel_j: x = 0");
    auto u = detail::miller_downward<cplx>(l_max, detail::miller_start(l_max, std::abs(x)),
                                           cplx(1.0) / x, 1.0);
    const cplx j0 = std::sin(x) / x;
    if (l_max == 0) {
        u[0] = j0;
        return u;
    }
    const cplx j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    const cplx scale = (std::abs(j0) >= std::abs(j1)) ? j0 / u[0] : j1 / u[1];
    for (auto& v : u) v *= scale;
    return u;
}

// h1_l(x) = j_l(x) + i y_l(x), any x != 0 with Im x >= 0.
// Real axis: assembled from the two real solutions.  Off the real axis the
// closed seeds are recursed upward (h1 is dominant there, so upward is stable);
// for purely imaginary x this keeps i^l h1_l exactly real.
inline std::vector<cplx> spherical_hankel1(int l_max, cplx x) {
    if (l_max < 0) throw DomainError("spherical_hankel1: l_max < 0");
    if (x.imag() < 0.0) throw DomainError("spherical_hankel1: Im x < 0");
    if (std::abs(x) == 0.0) throw DomainError("spherical_hankel1: x = 0");
    std::vector<cplx> h(static_cast<size_t>(l_max) + 1);
    if (x.imag() == 0.0) {
        const double xr = x.real();
        if (xr < 0.0) throw DomainError("spherical_hankel1: x < 0 on real axis");
        auto j = sph_j_real(l_max, xr);
        auto y = sph_y_real(l_max, xr);
        for (int l = 0; l <= l_max; ++l) h[l] = cplx(j[l], y[l]);
        return h;
    }
    const cplx eix = std::exp(iunit * x);
    h[0] = -iunit * eix / x;
    if (l_max >= 1) h[1] = -(x + iunit) * eix / (x * x);
    for (int l = 1; l < l_max; ++l)
        h[l + 1] = cplx(2.0 * l + 1.0) / x * h[l] - h[l - 1];
    return h;
}

// scaled modified functions for real x > 0:
//   ibar_l(x) = e^{-x} i_l(x),  kbar_l(x) = e^{x} k_l(x).
// Products i_l(a)/k_l(b) * k_m(c) are then ibar/kbar * kbar * e^{a+b-c},
// which never overflows for the screened geometries this library handles.
inline void sph_ik_scaled(int l_max, double x, std::vector<double>& ibar,
                          std::vector<double>& kbar) {
    if (l_max < 0) throw DomainError("sph_ik_scaled: l_max < 0");
    detail::require_positive(x, "sph_ik_scaled");
    kbar.assign(static_cast<size_t>(l_max) + 1, 0.0);
    kbar[0] = pi / (2.0 * x);
    if (l_max >= 1) kbar[1] = kbar[0] * (1.0 + 1.0 / x);
    for (int l = 1; l < l_max; ++l)
        kbar[l + 1] = kbar[l - 1] + (2.0 * l + 1.0) / x * kbar[l];

    auto u = detail::miller_downward<double>(l_max, detail::miller_start(l_max, x),
                                             1.0 / x, -1.0);
    const double ib0 = -std::expm1(-2.0 * x) / (2.0 * x);
    const double scale = ib0 / u[0];
    ibar = std::move(u);
    for (auto& v : ibar) v *= scale;
}

// extended-range variant: near x -> 0 the pair spans (2l-1)!! / x^l, which
// leaves double range around l ~ 45 for the small arguments adaptive
// quadrature probes, while long double holds to l ~ 64 down to x ~ 1e-70
inline void sph_ik_scaled_ext(int l_max, long double x,
                              std::vector<long double>& ibar,
                              std::vector<long double>& kbar) {
    if (l_max < 0) throw DomainError("sph_ik_scaled_ext: l_max < 0");
    detail::require_positive(static_cast<double>(x), "sph_ik_scaled_ext");
    kbar.assign(static_cast<size_t>(l_max) + 1, 0.0L);
    kbar[0] = static_cast<long double>(pi) / (2.0L * x);
    if (l_max >= 1) kbar[1] = kbar[0] * (1.0L + 1.0L / x);
    for (int l = 1; l < l_max; ++l)
        kbar[l + 1] = kbar[l - 1] + (2.0L * l + 1.0L) / x * kbar[l];

    auto u = detail::miller_downward<long double>(
        l_max, detail::miller_start(l_max, static_cast<double>(x)), 1.0L / x, -1.0);
    const long double ib0 = -std::expm1(-2.0L * x) / (2.0L * x);
    const long double scale = ib0 / u[0];
    ibar = std::move(u);
    for (auto& v : ibar) v *= scale;
}

// extended-range oscillatory pair j_l, y_l on the real axis.  Same small-x
// rationale as sph_ik_scaled_ext: y_l spans (2l-1)!! / x^{l+1} and leaves
// double range near l ~ 45 long before the assembled entries do.
inline void sph_jy_ext(int l_max, long double x, std::vector<long double>& j,
                       std::vector<long double>& y) {
    if (l_max < 0) throw DomainError("sph_jy_ext: l_max < 0");
    detail::require_positive(static_cast<double>(x), "sph_jy_ext");
    const long double s = std::sin(x), c = std::cos(x);
    y.assign(static_cast<size_t>(l_max) + 1, 0.0L);
    y[0] = -c / x;
    if (l_max >= 1) y[1] = -c / (x * x) - s / x;
    for (int l = 1; l < l_max; ++l)
        y[l + 1] = (2.0L * l + 1.0L) / x * y[l] - y[l - 1];

    j.assign(static_cast<size_t>(l_max) + 1, 0.0L);
    const long double j0 = s / x;
    if (l_max == 0) {
        j[0] = j0;
        return;
    }
    const long double j1 = s / (x * x) - c / x;
    if (x >= static_cast<long double>(l_max)) {  // oscillatory regime: upward is safe
        j[0] = j0;
        j[1] = j1;
        for (int l = 1; l < l_max; ++l)
            j[l + 1] = (2.0L * l + 1.0L) / x * j[l] - j[l - 1];
        return;
    }
    auto u = detail::miller_downward<long double>(
        l_max, detail::miller_start(l_max, static_cast<double>(x)), 1.0L / x, 1.0);
    const long double scale = (std::fabs(j0) >= std::fabs(j1)) ? j0 / u[0] : j1 / u[1];
    j = std::move(u);
    for (auto& v : j) v *= scale;
}

// f'_l from the table of f_0..f_{l+1}; valid for j, y, h1, same recurrence
template <class T>
T sph_deriv(const std::vector<T>& f, int l, T x) {
    if (l == 0) return -f[1];
    return f[l - 1] - (static_cast<double>(l + 1) / x) * f[l];
}

namespace detail3j {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using f50 = boost::multiprecision::cpp_bin_float_50;

inline const cpp_int& fact(int n) {
    static const std::vector<cpp_int> table = [] {
        std::vector<cpp_int> t(200);
        t[0] = 1;
        for (int i = 1; i < 200; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    return table[static_cast<size_t>(n)];
}

inline bool selection_fails(int l1, int l2, int l3, int m1, int m2, int m3) {
    if (m1 + m2 + m3 != 0) return true;
    if (l3 < std::abs(l1 - l2) || l3 > l1 + l2) return true;
    if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3) return true;
    return false;
}

inline double racah_exact(int l1, int l2, int l3, int m1, int m2, int m3) {
    cpp_rational prefac =
        cpp_rational(fact(l1 + l2 - l3) * fact(l1 - l2 + l3) * fact(-l1 + l2 + l3),
                     fact(l1 + l2 + l3 + 1));
    prefac *= cpp_rational(fact(l1 + m1) * fact(l1 - m1) * fact(l2 + m2) *
                               fact(l2 - m2) * fact(l3 + m3) * fact(l3 - m3),
                           1);
    const int t_lo = std::max({0, l2 - l3 - m1, l1 - l3 + m2});
    const int t_hi = std::min({l1 + l2 - l3, l1 - m1, l2 + m2});
    cpp_rational series = 0;
    for (int t = t_lo; t <= t_hi; ++t) {
        cpp_int den = fact(t) * fact(l1 + l2 - l3 - t) * fact(l1 - m1 - t) *
                      fact(l2 + m2 - t) * fact(l3 - l2 + m1 + t) *
                      fact(l3 - l1 - m2 + t);
        cpp_rational term(1, den);
        series += (t & 1) ? -term : term;
    }
    f50 val = f50(series) * sqrt(f50(prefac));
    if ((l1 - l2 - m3) & 1) val = -val;
    return static_cast<double>(val);
}

// ln n! in extended precision, tabulated once
inline long double lfactl(int n) {
    static const std::vector<long double> table = [] {
        std::vector<long double> t(400);
        t[0] = 0.0L;
        for (int i = 1; i < 400; ++i)
            t[i] = t[i - 1] + std::log(static_cast<long double>(i));
        return t;
    }();
    return table[static_cast<size_t>(n)];
}

// Extended-precision Racah series.  Only the largest term goes through exp;
// its neighbors follow from exact small-integer ratios, so the alternating
// cancellation is carried out on relative values good to long-double eps.
inline double racah_float(int l1, int l2, int l3, int m1, int m2, int m3) {
    const long double half_log_pre =
        0.5L * (lfactl(l1 + l2 - l3) + lfactl(l1 - l2 + l3) +
                lfactl(-l1 + l2 + l3) - lfactl(l1 + l2 + l3 + 1) +
                lfactl(l1 + m1) + lfactl(l1 - m1) + lfactl(l2 + m2) +
                lfactl(l2 - m2) + lfactl(l3 + m3) + lfactl(l3 - m3));
    const int t_lo = std::max({0, l2 - l3 - m1, l1 - l3 + m2});
    const int t_hi = std::min({l1 + l2 - l3, l1 - m1, l2 + m2});

    auto log_den = [&](int t) {
        return lfactl(t) + lfactl(l1 + l2 - l3 - t) + lfactl(l1 - m1 - t) +
               lfactl(l2 + m2 - t) + lfactl(l3 - l2 + m1 + t) +
               lfactl(l3 - l1 - m2 + t);
    };
    int t0 = t_lo;
    long double den0 = log_den(t_lo);
    for (int t = t_lo + 1; t <= t_hi; ++t) {
        const long double d = log_den(t);
        if (d < den0) {
            den0 = d;
            t0 = t;
        }
    }
    const long double anchor = std::exp(half_log_pre - den0);

    // term(t+1)/term(t), an exact ratio of small integer products
    auto step_up = [&](int t) {
        const long double num = static_cast<long double>(l1 + l2 - l3 - t) *
                                static_cast<long double>(l1 - m1 - t) *
                                static_cast<long double>(l2 + m2 - t);
        const long double den = static_cast<long double>(t + 1) *
                                static_cast<long double>(l3 - l2 + m1 + t + 1) *
                                static_cast<long double>(l3 - l1 - m2 + t + 1);
        return -num / den;
    };

    long double sum = 0.0L, comp = 0.0L;
    auto accumulate = [&](long double term) {
        const long double yk = term - comp, tk = sum + yk;
        comp = (tk - sum) - yk;
        sum = tk;
    };
    long double term = (t0 & 1) ? -anchor : anchor;
    accumulate(term);
    long double up = term;
    for (int t = t0; t < t_hi; ++t) {
        up *= step_up(t);
        accumulate(up);
    }
    long double down = term;
    for (int t = t0 - 1; t >= t_lo; --t) {
        down /= step_up(t);
        accumulate(down);
    }
    const double out = static_cast<double>(sum);
    return ((l1 - l2 - m3) & 1) ? -out : out;
}

}  // namespace detail3j

// Wigner 3j symbol for integer angular momenta.  Exact rational evaluation
// at small l, extended-precision series above; the crossover keeps the slow
// exact arithmetic out of large coupling tables.
inline double wigner_3j(int l1, int l2, int l3, int m1, int m2, int m3) {
    if (l1 < 0 || l2 < 0 || l3 < 0) throw DomainError("wigner_3j: negative l");
    if (detail3j::selection_fails(l1, l2, l3, m1, m2, m3)) return 0.0;
    if (std::max({l1, l2, l3}) <= 30) return detail3j::racah_exact(l1, l2, l3, m1, m2, m3);
    return detail3j::racah_float(l1, l2, l3, m1, m2, m3);
}

namespace detailY {

// normalized associated Legendre Pbar_l^m(x), m >= 0, including the
// Condon-Shortley phase; sum_m |Y_l^m|^2 = (2l+1)/(4 pi)
inline double pbar(int l, int m, double ct, double st) {
    double pmm = std::sqrt(1.0 / (4.0 * pi));
    for (int k = 1; k <= m; ++k)
        pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * st;
    if (l == m) return pmm;
    double pm1 = std::sqrt(2.0 * m + 3.0) * ct * pmm;
    if (l == m + 1) return pm1;
    double p = 0.0;
    for (int ll = m + 2; ll <= l; ++ll) {
        const double a = std::sqrt((4.0 * ll * ll - 1.0) /
                                   (static_cast<double>(ll) * ll - static_cast<double>(m) * m));
        const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - static_cast<double>(m) * m) /
                                   (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
        p = a * (ct * pm1 - b * pmm);
        pmm = pm1;
        pm1 = p;
    }
    return p;
}

}  // namespace detailY

inline cplx spherical_harmonic(int l, int m, double theta, double phi) {
    if (l < 0) throw DomainError("spherical_harmonic: l < 0");
    if (std::abs(m) > l) throw DomainError("spherical_harmonic: |m| > l");
    const int ma = std::abs(m);
    const double p = detailY::pbar(l, ma, std::cos(theta), std::sin(theta));
    cplx y = p * std::exp(iunit * (static_cast<double>(ma) * phi));
    if (m < 0) y = (ma & 1) ? -std::conj(y) : std::conj(y);
    return y;
}

inline cplx spherical_harmonic(int l, int m, const Vec3& n) {
    const double r = n.norm();
    if (std::abs(r - 1.0) > 1e-9)
        throw DomainError("spherical_harmonic: direction must be a unit vector");
    const double theta = std::atan2(std::hypot(n.x, n.y), n.z);
    const double phi = std::atan2(n.y, n.x);
    return spherical_harmonic(l, m, theta, phi);
}

// Wigner small-d, factorial sum; adequate through l ~ 60 in double precision
inline double wigner_small_d(int l, int mp, int m, double beta) {
    if (l < 0 || std::abs(mp) > l || std::abs(m) > l)
        throw DomainError("wigner_small_d: bad indices");
    auto lf = [](int n) { return std::lgamma(static_cast<double>(n) + 1.0); };
    const double c = std::cos(0.5 * beta), s = std::sin(0.5 * beta);
    auto ipow_real = [](double base, int e) {
        return (e == 0) ? 1.0 : std::pow(base, e);
    };
    const double half_log_pre =
        0.5 * (lf(l + mp) + lf(l - mp) + lf(l + m) + lf(l - m));
    const int s_lo = std::max(0, m - mp);
    const int s_hi = std::min(l + m, l - mp);
    double sum = 0.0;
    for (int k = s_lo; k <= s_hi; ++k) {
        const double log_den = lf(l + m - k) + lf(k) + lf(mp - m + k) + lf(l - mp - k);
        double term = std::exp(half_log_pre - log_den) *
                      ipow_real(c, 2 * l - 2 * k + m - mp) * ipow_real(s, mp - m + 2 * k);
        if ((mp - m + k) & 1) term = -term;
        sum += term;
    }
    return sum;
}

inline cplx wigner_D(int l, int mp, int m, double alpha, double beta, double gamma) {
    return std::exp(-iunit * (static_cast<double>(mp) * alpha)) *
           wigner_small_d(l, mp, m, beta) *
           std::exp(-iunit * (static_cast<double>(m) * gamma));
}

// full (2l+1)x(2l+1) block, row m' and column m, both running -l..l;
// entry (m', m) at [(m'+l)*(2l+1) + (m+l)]
inline std::vector<cplx> wigner_rotation(int l, double alpha, double beta, double gamma) {
    if (l < 0) throw DomainError("wigner_rotation: l < 0");
    const int dim = 2 * l + 1;
    std::vector<cplx> d(static_cast<size_t>(dim) * dim);
    for (int mp = -l; mp <= l; ++mp)
        for (int m = -l; m <= l; ++m)
            d[static_cast<size_t>(mp + l) * dim + (m + l)] =
                wigner_D(l, mp, m, alpha, beta, gamma);
    return d;
}

}  // namespace mscat::specfun
