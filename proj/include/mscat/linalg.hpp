#pragma once
// Dense complex matrices and a log-domain determinant via LU with partial
// pivoting.  Log space keeps determinants of large screened systems from
// underflowing; the phase is reported on the principal branch.

#include <cmath>
#include <vector>

#include "core.hpp"

namespace mscat {

struct MatrixZ {
    int n = 0;
    std::vector<cplx> a;  // row major

    MatrixZ() = default;
    explicit MatrixZ(int n_) : n(n_), a(static_cast<size_t>(n_) * n_) {}

    cplx& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const cplx& at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    static MatrixZ identity(int n) {
        MatrixZ m(n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline MatrixZ matmul(const MatrixZ& A, const MatrixZ& B) {
    MatrixZ C(A.n);
    for (int i = 0; i < A.n; ++i)
        for (int k = 0; k < A.n; ++k) {
            const cplx aik = A.at(i, k);
            if (aik == cplx(0.0)) continue;
            for (int j = 0; j < A.n; ++j) C.at(i, j) += aik * B.at(k, j);
        }
    return C;
}

struct LogDet {
    double real_part = 0.0;   // ln |det|
    double imag_part = 0.0;   // arg det, principal branch (-pi, pi]
    double pivot_growth = 1.0;  // max/min pivot magnitude, conditioning hint
};

inline double wrap_to_pi(double x) {
    double w = std::remainder(x, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

// consumes its argument; factorization is done in place on the copy
inline LogDet logdet_complex(MatrixZ m) {
    const int n = m.n;
    if (n == 0) return {};
    double log_mag = 0.0, phase = 0.0;
    double piv_max = 0.0, piv_min = std::numeric_limits<double>::infinity();
    int swaps = 0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(m.at(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(m.at(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best))
            throw SingularMatrixError("logdet_complex: zero or non-finite pivot");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(m.at(col, j), m.at(piv, j));
            ++swaps;
        }
        const cplx d = m.at(col, col);
        log_mag += std::log(std::abs(d));
        phase += std::arg(d);
        piv_max = std::max(piv_max, std::abs(d));
        piv_min = std::min(piv_min, std::abs(d));
        for (int r = col + 1; r < n; ++r) {
            const cplx f = m.at(r, col) / d;
            if (f == cplx(0.0)) continue;
            m.at(r, col) = f;
            for (int j = col + 1; j < n; ++j) m.at(r, j) -= f * m.at(col, j);
        }
    }
    if (swaps & 1) phase += pi;
    return {log_mag, wrap_to_pi(phase), piv_max / piv_min};
}

}  // namespace mscat
