#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <mscat/casimir.hpp>

using namespace mscat;

TEST_CASE("s-wave energy forms hit their frozen values", "[casimir]") {
    SECTION("two spheres") {
        const auto e = fermionic_energy_two_sphere_approx(1.0, 10.0, FermiGas{1.0, 1});
        REQUIRE(e.units == EnergyUnits::chemical_potential);
        REQUIRE(e.method == EnergyMethod::swave_asymptotic);
        REQUIRE(e.value == Catch::Approx(-1.168378225340196e-4).epsilon(1e-12));
        // degeneracy is an exact linear factor
        const auto e2 = fermionic_energy_two_sphere_approx(1.0, 10.0, FermiGas{1.0, 2});
        REQUIRE(e2.value == Catch::Approx(2.0 * e.value).epsilon(1e-15));
    }
    SECTION("sphere and plate") {
        const auto e = fermionic_energy_sphere_plate_approx(1.0, 5.0, FermiGas{1.0, 1});
        REQUIRE(e.value == Catch::Approx(-2.497680331315073e-3).epsilon(1e-12));
    }
    SECTION("zero crossings sit at the roots of j_1") {
        // first positive root of j_1
        const double x1 = 4.493409457909064;
        const auto e = fermionic_energy_two_sphere_approx(1.0, 10.0,
                                                          FermiGas{x1 / 16.0, 1});
        REQUIRE(std::abs(e.value) < 1e-19);
        const auto p = fermionic_energy_sphere_plate_approx(1.0, 5.0,
                                                            FermiGas{x1 / 10.0, 1});
        REQUIRE(std::abs(p.value) < 1e-19);
    }
}

TEST_CASE("proximity-force conventions", "[casimir]") {
    SECTION("closed forms equal their surface integrals") {
        for (const double L : {0.3, 1.1}) {
            const double a = (L < 1.0) ? 1.0 : 2.0;
            for (const auto basis : {PfaBasis::plate, PfaBasis::sphere}) {
                const double closed = pfa_sphere_plate(a, L, basis).value;
                const double integral = pfa_proximity_integral(a, L, basis).value;
                REQUIRE(integral == Catch::Approx(closed).epsilon(1e-10));
            }
        }
    }
    SECTION("both conventions share the leading close-approach magnitude") {
        const double a = 1.0, L = 1e-4;
        const double lead = pfa_leading_sphere_plate(a, L);
        REQUIRE(pfa_sphere_plate(a, L, PfaBasis::plate).value / lead ==
                Catch::Approx(1.0).margin(2e-4));
        REQUIRE(pfa_sphere_plate(a, L, PfaBasis::sphere).value / lead ==
                Catch::Approx(1.0).margin(3e-4));
    }
    SECTION("the conventions split by exactly 3/5 at L = 2a") {
        const double ratio = pfa_sphere_plate(1.0, 2.0, PfaBasis::plate).value /
                             pfa_sphere_plate(1.0, 2.0, PfaBasis::sphere).value;
        REQUIRE(ratio == Catch::Approx(0.6).epsilon(1e-14));
    }
    SECTION("attraction weakens with distance") {
        double prev = -pfa_sphere_plate(1.0, 0.1, PfaBasis::plate).value;
        for (const double L : {0.2, 0.5, 1.0, 3.0}) {
            const double cur = -pfa_sphere_plate(1.0, L, PfaBasis::plate).value;
            REQUIRE(cur > 0.0);
            REQUIRE(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("two-bounce periodic-orbit sum", "[casimir]") {
    SECTION("single repeat closed form at wide separation") {
        const double a = 1.0, r = 50.0;
        const auto e = scalar_semiclassical_two_bounce(a, r, OrbitKind::two_spheres, 1);
        REQUIRE(e.method == EnergyMethod::semiclassical);
        REQUIRE(e.value ==
                Catch::Approx(-a * a / (16.0 * pi * r * (r - 2.0 * a) * (r - 2.0 * a)))
                    .epsilon(1e-12));
    }
    SECTION("repetitions are negligible for wide, dominant for tight gaps") {
        const auto one = scalar_semiclassical_two_bounce(1.0, 50.0,
                                                         OrbitKind::two_spheres, 1);
        const auto all = scalar_semiclassical_two_bounce(1.0, 50.0,
                                                         OrbitKind::two_spheres, 0);
        REQUIRE(std::abs(all.value / one.value - 1.0) < 1e-4);
        REQUIRE(std::abs(all.value / one.value - 1.0) > 1e-7);
    }
    SECTION("close approach to a plate recovers the proximity magnitude") {
        // the full repeat sum builds up zeta(4), matching the leading
        // proximity force as the gap closes
        const double a = 1.0, L = 1e-4;
        const auto all = scalar_semiclassical_two_bounce(a, L, OrbitKind::sphere_plate, 0);
        REQUIRE(all.value / pfa_leading_sphere_plate(a, L) ==
                Catch::Approx(1.0).margin(1e-3));
    }
}

TEST_CASE("scalar energy on the imaginary axis: two spheres", "[casimir]") {
    const double a = 1.0, r = 34.0;
    const auto e = scalar_energy_two_spheres(a, a, r, 1e-8);
    REQUIRE(e.units == EnergyUnits::hbar_c_over_length);
    REQUIRE(e.method == EnergyMethod::exact);
    REQUIRE(e.value < 0.0);
    REQUIRE(e.value == Catch::Approx(-2.0958394775753864e-6).epsilon(5e-4));
    // wide separations approach the monopole asymptote
    const double ratio = e.value * 4.0 * pi * r * r * (r - 2.0 * a) / (a * a);
    REQUIRE(ratio == Catch::Approx(-1.0).margin(0.1));
    REQUIRE(e.quad_error < 1e-3 * std::abs(e.value));
}

TEST_CASE("scalar energy on the imaginary axis: sphere and plate", "[casimir]") {
    const double a = 1.0, L = 32.0;
    const auto e = scalar_energy_sphere_plate(a, L, 1e-8);
    REQUIRE(e.value < 0.0);
    const double normalized = e.value / pfa_leading_sphere_plate(a, L);
    REQUIRE(normalized == Catch::Approx(1.775).margin(4e-3));
}

TEST_CASE("fermionic exact energy against the s-wave form", "[casimir]") {
    // oscillating interaction at k_F a = 2: the closed form tracks the full
    // determinant to a few tens of percent at r = 10a
    const auto exact =
        fermionic_energy_exact(make_two_spheres(1.0, 1.0, 10.0), FermiGas{2.0, 1});
    REQUIRE(exact.units == EnergyUnits::chemical_potential);
    REQUIRE(exact.scan_points >= 52);
    REQUIRE(exact.value == Catch::Approx(4.2243e-5).epsilon(5e-3));
    const auto approx =
        fermionic_energy_two_sphere_approx(1.0, 10.0, FermiGas{2.0, 1});
    REQUIRE(approx.value > 0.0);
    REQUIRE(std::abs(exact.value - approx.value) < 0.25 * std::abs(exact.value));
}

TEST_CASE("fermionic energy varies smoothly with the Fermi level", "[casimir]") {
    const auto g = make_two_spheres(1.0, 1.0, 6.0);
    const auto e1 = fermionic_energy_exact(g, FermiGas{1.0, 1});
    const auto e2 = fermionic_energy_exact(g, FermiGas{1.02, 1});
    // no branch loss between nearby Fermi levels: the change stays far
    // below a single miscounted state, which would shift the value by ~1
    REQUIRE(std::abs(e2.value - e1.value) < 0.02);
}

TEST_CASE("geometry queries", "[casimir]") {
    REQUIRE(make_two_spheres(1.0, 1.0, 6.0).gap() == Catch::Approx(4.0));
    REQUIRE(make_sphere_plate(1.0, 0.5).gap() == Catch::Approx(0.5));
    REQUIRE_THROWS_AS(make_sphere_plate(1.0, -0.5), DomainError);
    REQUIRE_THROWS_AS(make_sphere_plate(0.0, 0.5), DomainError);
    const auto tri = make_n_spheres(build_configuration(
        {Scatterer{0, 0.5, {0.0, 0.0, 0.0}}, Scatterer{1, 0.7, {0.0, 0.0, 4.0}},
         Scatterer{2, 0.9, {0.0, 3.0, 2.0}}}));
    REQUIRE(tri.kind == GeometryKind::n_spheres);
    REQUIRE(tri.gap() == Catch::Approx(std::sqrt(13.0) - 1.6));
}
