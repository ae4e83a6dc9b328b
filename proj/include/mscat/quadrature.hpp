#pragma once
// Globally adaptive Gauss-Kronrod 7-15 quadrature.  The worst panel (by
// error estimate) is bisected until the summed estimate meets the target
// or the panel budget runs out, in which case the best estimate is still
// reported inside the exception.

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "core.hpp"

namespace mscat {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

namespace detail_quad {

// 15-point Kronrod extension of Gauss-7, positive abscissae
inline constexpr double xgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double wgk[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
inline constexpr double wg[4] = {0.1294849661688697, 0.2797053914892767,
                                 0.3818300505051189, 0.4179591836734694};

struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

template <class F>
Panel rule15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * xgk[i]);
        fv[14 - i] = f(c + h * xgk[i]);
    }
    fv[7] = f(c);
    double resk = 0.0, resg = 0.0, resabs = 0.0;
    for (int i = 0; i < 7; ++i) {
        resk += wgk[i] * (fv[i] + fv[14 - i]);
        resabs += wgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
    }
    resk += wgk[7] * fv[7];
    resabs += wgk[7] * std::abs(fv[7]);
    for (int i = 0; i < 3; ++i) resg += wg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    resg += wg[3] * fv[7];

    const double reskh = 0.5 * resk;
    double resasc = wgk[7] * std::abs(fv[7] - reskh);
    for (int i = 0; i < 7; ++i)
        resasc += wgk[i] * (std::abs(fv[i] - reskh) + std::abs(fv[14 - i] - reskh));
    resasc *= h;

    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    err = std::max(err, eps50 * resabs * std::abs(h));
    return {a, b, resk * h, err};
}

}  // namespace detail_quad

template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol,
                              double abs_tol = 0.0, int max_panels = 2000) {
    if (!(b > a)) throw DomainError("integrate_adaptive: requires b > a");
    if (!(rel_tol > 0.0) && !(abs_tol > 0.0))
        throw DomainError("integrate_adaptive: no positive tolerance given");
    std::priority_queue<detail_quad::Panel> heap;
    heap.push(detail_quad::rule15(f, a, b));
    int panels = 1;
    double total = heap.top().value, toterr = heap.top().err;
    for (;;) {
        const double target = std::max(abs_tol, rel_tol * std::abs(total));
        if (toterr <= target) return {total, toterr, panels};
        if (panels >= max_panels)
            throw ToleranceNotMet(total, toterr,
                                  "integrate_adaptive: panel budget exhausted");
        const detail_quad::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail_quad::rule15(f, worst.a, mid);
        const auto right = detail_quad::rule15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        toterr += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
}

}  // namespace mscat
