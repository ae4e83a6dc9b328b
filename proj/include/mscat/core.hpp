#pragma once
// Shared scalar types, 3-vectors, rotations, and the error taxonomy.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mscat {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr cplx iunit{0.0, 1.0};

// i^n for integer n, exact components
inline cplx ipow(long n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Proper rotation, row-major 3x3.  Euler convention is z-y-z:
// R = Rz(alpha) * Ry(beta) * Rz(gamma), acting on column vectors.
struct Rot3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double at(int r, int c) const { return m[3 * r + c]; }
    double& at(int r, int c) { return m[3 * r + c]; }

    static Rot3 identity() { return {}; }

    static Rot3 from_euler_zyz(double alpha, double beta, double gamma) {
        const double ca = std::cos(alpha), sa = std::sin(alpha);
        const double cb = std::cos(beta), sb = std::sin(beta);
        const double cg = std::cos(gamma), sg = std::sin(gamma);
        Rot3 r;
        r.at(0, 0) = ca * cb * cg - sa * sg;
        r.at(0, 1) = -ca * cb * sg - sa * cg;
        r.at(0, 2) = ca * sb;
        r.at(1, 0) = sa * cb * cg + ca * sg;
        r.at(1, 1) = -sa * cb * sg + ca * cg;
        r.at(1, 2) = sa * sb;
        r.at(2, 0) = -sb * cg;
        r.at(2, 1) = sb * sg;
        r.at(2, 2) = cb;
        return r;
    }

    // inverse map: R -> (alpha, beta, gamma) with beta in [0, pi]
    std::array<double, 3> to_euler_zyz() const {
        const double cb = std::clamp(at(2, 2), -1.0, 1.0);
        const double sb = std::hypot(at(0, 2), at(1, 2));
        if (sb > 1e-12) {
            return {std::atan2(at(1, 2), at(0, 2)), std::acos(cb),
                    std::atan2(at(2, 1), -at(2, 0))};
        }
        if (cb > 0.0) {  // beta ~ 0, only alpha+gamma determined
            return {std::atan2(at(1, 0), at(0, 0)), 0.0, 0.0};
        }
        return {std::atan2(-at(1, 0), -at(0, 0)), pi, 0.0};
    }

    Vec3 apply(const Vec3& v) const {
        return {at(0, 0) * v.x + at(0, 1) * v.y + at(0, 2) * v.z,
                at(1, 0) * v.x + at(1, 1) * v.y + at(1, 2) * v.z,
                at(2, 0) * v.x + at(2, 1) * v.y + at(2, 2) * v.z};
    }

    Vec3 apply_transposed(const Vec3& v) const {
        return {at(0, 0) * v.x + at(1, 0) * v.y + at(2, 0) * v.z,
                at(0, 1) * v.x + at(1, 1) * v.y + at(2, 1) * v.z,
                at(0, 2) * v.x + at(1, 2) * v.y + at(2, 2) * v.z};
    }

    Rot3 transposed() const {
        Rot3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
        return r;
    }

    Rot3 compose(const Rot3& o) const {  // (*this) * o
        Rot3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += at(i, k) * o.at(k, j);
                r.at(i, j) = s;
            }
        return r;
    }
};

// --- error taxonomy ---

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OverlapError : std::invalid_argument {
    int id_a, id_b;
    OverlapError(int a, int b, const std::string& what)
        : std::invalid_argument(what), id_a(a), id_b(b) {}
};

struct DuplicateCenterError : std::invalid_argument {
    int id_a, id_b;
    DuplicateCenterError(int a, int b, const std::string& what)
        : std::invalid_argument(what), id_a(a), id_b(b) {}
};

struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ToleranceNotMet : std::runtime_error {
    double best_estimate, achieved_error;
    ToleranceNotMet(double est, double err, const std::string& what)
        : std::runtime_error(what), best_estimate(est), achieved_error(err) {}
};

struct RefinementBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
    int order_reached;
    double last_delta;
    NoConvergence(int order, double delta, const std::string& what)
        : std::runtime_error(what), order_reached(order), last_delta(delta) {}
};

}  // namespace mscat
