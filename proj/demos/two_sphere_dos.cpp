// Counting function n_c(k) for two equal hard spheres, compared with its two
// closed-form companions: the long-wavelength (lowest partial wave) form and
// the periodic-orbit sum over the bouncing trajectory.
//
// Output is Gnuplot-readable: k, exact, lowest-wave, one bounce, five bounces.

#include <cstdio>
#include <vector>

#include <mscat/mscat.hpp>

using namespace mscat;

// sphere radius and center-to-center separation
const double a = 1.0;
const double r = 5.0;

// scan window and resolution
const double k_lo = 0.05;
const double k_hi = 6.0;
const int n_pts = 241;

int main() {
    std::vector<double> grid(n_pts);
    for (int i = 0; i < n_pts; ++i)
        grid[i] = k_lo + (k_hi - k_lo) * i / (n_pts - 1);

    const DosScan scan = integrated_dos_exact(two_sphere_config(a, a, r), grid, 1e-6);

    std::printf("# two spheres, a = %g, r = %g, cutoff l_max = %d\n", a, r, scan.l_max);
    std::printf("# k  n_c  n_c_lowest_wave  n_c_one_bounce  n_c_five_bounces\n");
    for (const auto& d : scan.dos) {
        const double sw = nc_swave_two_spheres(a, r, d.k).n_c;
        const double b1 = nc_semiclassical_two_spheres(a, r, d.k, 1, 1).n_c;
        const double b5 = nc_semiclassical_two_spheres(a, r, d.k, 1, 5).n_c;
        std::printf("%g %.12g %.12g %.12g %.12g\n", d.k, d.n_c, sw, b1, b5);
    }
    return 0;
}
