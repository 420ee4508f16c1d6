#include <doctest.h>

#include <cmath>

#include "vibronic/grid.hpp"
#include "vibronic/model_potentials.hpp"

using namespace vib;

TEST_CASE("screened attraction has the right small-separation limit") {
    const double rc = 4.0;
    const double limit = 2.0 / (std::sqrt(M_PI) * rc);
    CHECK(screened_coulomb(0.0, rc) == doctest::Approx(limit).epsilon(1e-15));
    CHECK(screened_coulomb(1e-9, rc) == doctest::Approx(limit).epsilon(1e-8));
    // continuity across the switch
    CHECK(screened_coulomb(0.99e-8, rc) ==
          doctest::Approx(screened_coulomb(1.01e-8, rc)).epsilon(1e-12));
    // long range recovers the bare 1/|v| interaction
    CHECK(screened_coulomb(30.0, rc) == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    CHECK(screened_coulomb(-7.0, rc) == doctest::Approx(screened_coulomb(7.0, rc)));
}

TEST_CASE("three-center potential transcribed term by term") {
    ShinMetiuModel m;
    const double x = 1.7, r = -2.3;
    const double half = m.L / 2.0;
    const double want = m.z_alpha * m.z_gamma / std::abs(r + half) +
                        m.z_beta * m.z_gamma / std::abs(r - half) -
                        m.z_alpha * std::erf(std::abs(x + half) / m.rc_alpha) /
                            std::abs(x + half) -
                        m.z_beta * std::erf(std::abs(x - half) / m.rc_beta) /
                            std::abs(x - half) -
                        m.z_gamma * std::erf(std::abs(x - r) / m.rc_gamma) / std::abs(x - r);
    CHECK(shin_metiu_potential(m, x, r) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("moving ion is confined between the fixed ions") {
    ShinMetiuModel m;
    const double limit = m.L / 2.0 - m.domain_margin;
    CHECK_NOTHROW(shin_metiu_potential(m, 0.0, limit - 1e-6));
    CHECK_THROWS_AS(shin_metiu_potential(m, 0.0, limit + 1e-6), DomainError);
    CHECK_THROWS_AS(shin_metiu_potential(m, 0.0, -limit - 1e-6), DomainError);
}

TEST_CASE("analytic dU/dR agrees with finite differences") {
    ShinMetiuModel m;
    const double h = 1e-5;
    // includes a point with x - R near zero to exercise the series branch
    const double samples[][2] = {{1.7, -2.3}, {-4.0, 3.1}, {0.3, 0.3002}, {2.0, 1.99},
                                 {-6.5, -1.0}, {0.0, 4.2}};
    for (const auto& s : samples) {
        const double x = s[0], r = s[1];
        const double fd = (shin_metiu_potential(m, x, r + h) - shin_metiu_potential(m, x, r - h)) /
                          (2.0 * h);
        CHECK(shin_metiu_dudr(m, x, r) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("series and closed-form derivative branches join smoothly") {
    ShinMetiuModel m;
    const double x = 0.0;
    // |x - R| = 0.1 rc_gamma is the branch switch
    const double r_switch = -0.1 * m.rc_gamma;
    const double below = shin_metiu_dudr(m, x, r_switch + 1e-9);
    const double above = shin_metiu_dudr(m, x, r_switch - 1e-9);
    CHECK(below == doctest::Approx(above).epsilon(1e-8));
}

TEST_CASE("soft-core potential with table lookup") {
    H2pModel m;
    m.softening_table = {{1.0, 1.0}, {3.0, 2.0}};
    CHECK(m.softening(2.0) == doctest::Approx(1.5));
    CHECK(m.softening(0.5) == doctest::Approx(1.0));  // clamped left
    CHECK(m.softening(9.0) == doctest::Approx(2.0));  // clamped right
    const double r = 2.0, x = 0.4, a = m.softening(r);
    const double want = 1.0 / r - 1.0 / std::sqrt((x - r / 2) * (x - r / 2) + a) -
                        1.0 / std::sqrt((x + r / 2) * (x + r / 2) + a);
    CHECK(h2p_potential(m, x, r) == doctest::Approx(want).epsilon(1e-14));
    CHECK_THROWS_AS(h2p_potential(m, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(h2p_potential(m, 0.0, -1.0), DomainError);
}

TEST_CASE("calibration recovers a known softening from its own curve") {
    // forward-generate a reference with fixed a, then ask the calibration to
    // find it back
    const Grid1D xg = Grid1D::from_range(-20.0, 20.0, 201);
    const double a_true = 1.2;
    H2pModel gen;
    gen.softening_table = {{0.0, a_true}};

    std::vector<std::pair<double, double>> reference;
    for (double r : {1.0, 2.0, 3.5}) {
        GridFunction v = sample(xg, [&](double x) { return h2p_potential(gen, x, r); });
        auto pairs = solve_symmetric(build_fgh_hamiltonian(xg, gen.electron_reduced_mass, v), 1);
        reference.emplace_back(r, pairs[0].value);
    }

    H2pModel m;
    const auto table = calibrate_softening(m, reference, xg);
    REQUIRE(table.size() == 3);
    for (const auto& [r, a] : table) CHECK(a == doctest::Approx(a_true).epsilon(1e-6));
}

TEST_CASE("calibration rejects unreachable reference energies") {
    const Grid1D xg = Grid1D::from_range(-20.0, 20.0, 201);
    H2pModel m;
    // far below any soft-core ground state at this separation
    std::vector<std::pair<double, double>> reference = {{2.0, -50.0}};
    CHECK_THROWS_AS(calibrate_softening(m, reference, xg), CalibrationError);
}

TEST_CASE("contract point: exact two-center energy at R = 2") {
    const Grid1D xg = Grid1D::from_range(-30.0, 30.0, 501);
    const double e_exact = -1.1026342144949;
    H2pModel m;
    const auto table = calibrate_softening(m, {{2.0, e_exact}}, xg);
    REQUIRE(table.size() == 1);
    CHECK(table[0].second == doctest::Approx(1.471906).epsilon(2e-5));

    m.softening_table = table;
    GridFunction v = sample(xg, [&](double x) { return h2p_potential(m, x, 2.0); });
    auto pairs = solve_symmetric(build_fgh_hamiltonian(xg, m.electron_reduced_mass, v), 1);
    CHECK(pairs[0].value == doctest::Approx(e_exact).epsilon(1e-6));
}
