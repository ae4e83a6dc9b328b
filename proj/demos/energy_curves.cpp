// Interaction-energy curves for the two supported field types.
//
// Dataset 0: two spheres in a Fermi gas.  The exact energy oscillates in
// sign with separation; the closed long-wavelength form tracks it once the
// gap exceeds a few Fermi wavelengths.
// Dataset 1: Dirichlet sphere and plate.  The exact scalar energy is shown
// in units of the leading proximity estimate, next to the two proximity
// conventions and the wide-gap asymptote.
//
// Datasets are separated by two blank lines (Gnuplot `index`).

#include <cmath>
#include <cstdio>

#include <mscat/mscat.hpp>

using namespace mscat;

// shared sphere radius
const double a = 1.0;

// Fermi sea: wavenumber at the chemical potential
const double k_F = 2.0;

int main() {
    std::printf("# two spheres in a Fermi sea, a = %g, k_F a = %g\n", a, k_F * a);
    std::printf("# r  E_exact/mu  E_closed/mu\n");
    for (int i = 0; i <= 40; ++i) {
        const double r = 2.2 + (8.0 - 2.2) * i / 40.0;
        const FermiGas gas{k_F, 1};
        const double exact =
            fermionic_energy_exact(make_two_spheres(a, a, r), gas, 1e-5).value;
        const double closed = fermionic_energy_two_sphere_approx(a, r, gas).value;
        std::printf("%g %.12g %.12g\n", r, exact, closed);
    }

    std::printf("\n\n# Dirichlet sphere and plate, energies over the leading "
                "proximity estimate\n");
    std::printf("# L/a  exact  pfa_plate  pfa_sphere  wide_gap_asymptote\n");
    const double asym = 2.0 * 90.0 / (pi * pi * pi * pi);
    for (const double L : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        const double lead = pfa_leading_sphere_plate(a, L);
        const double exact = scalar_energy_sphere_plate(a, L, 1e-6).value / lead;
        const double p_plate = pfa_sphere_plate(a, L, PfaBasis::plate).value / lead;
        const double p_sphere = pfa_sphere_plate(a, L, PfaBasis::sphere).value / lead;
        std::printf("%g %.12g %.12g %.12g %.12g\n", L / a, exact, p_plate, p_sphere, asym);
    }
    return 0;
}
