#include <doctest.h>

#include <cmath>

#include "vibronic/bo.hpp"
#include "vibronic/model_potentials.hpp"

using namespace vib;

namespace {

// V(x, R) = x^2/2 + R^2/50 separates: surface n is n + 1/2 + R^2/50 exactly.
ElectronicProblem separable() {
    return {[](double x, double r) { return 0.5 * x * x + r * r / 50.0; }, 1.0};
}

ElectronicScan separable_scan(int threads = 1) {
    const Grid1D xg = Grid1D::from_range(-8.0, 8.0, 129);
    const Grid1D rg = Grid1D::from_range(-3.0, 3.0, 61);
    return scan_electronic(separable(), xg, rg, 3, threads);
}

}  // namespace

TEST_CASE("separable scan reproduces shifted oscillator surfaces") {
    const ElectronicScan scan = separable_scan();
    REQUIRE(scan.n_states == 3);
    for (int j = 0; j < scan.r_grid.n_points; ++j) {
        const double r = scan.r_grid.point(j);
        for (int n = 0; n < 3; ++n)
            CHECK(scan.energies(n, j) ==
                  doctest::Approx(n + 0.5 + r * r / 50.0).epsilon(1e-9));
        CHECK(scan.states[1].col(j).squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("scan columns keep a continuous phase") {
    const ElectronicScan scan = separable_scan();
    for (int n = 0; n < 3; ++n)
        for (int j = 1; j < scan.r_grid.n_points; ++j)
            CHECK(scan.states[n].col(j).dot(scan.states[n].col(j - 1)) > 0.0);
}

TEST_CASE("scan output does not depend on the worker count") {
    const ElectronicScan a = separable_scan(1);
    const ElectronicScan b = separable_scan(4);
    CHECK((a.energies - b.energies).cwiseAbs().maxCoeff() == 0.0);
    for (int n = 0; n < 3; ++n)
        CHECK((a.states[n] - b.states[n]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nuclear ladder on a harmonic surface") {
    // W(R) = R^2/2 with mass 80: levels (m + 1/2) / sqrt(80)
    const Grid1D rg = Grid1D::from_range(-3.0, 3.0, 301);
    const double mass = 80.0;
    Eigen::VectorXd w(rg.n_points);
    for (int j = 0; j < rg.n_points; ++j) w(j) = 0.5 * rg.point(j) * rg.point(j);

    const double omega = 1.0 / std::sqrt(mass);
    const auto states = nuclear_states_from_potential(w, rg, mass, 8.5 * omega, 1);
    REQUIRE(states.size() == 8);
    for (int m = 0; m < 8; ++m) {
        CHECK(states[m].energy == doctest::Approx((m + 0.5) * omega).epsilon(1e-6));
        CHECK(states[m].surface == 1);
        CHECK(states[m].m == m);
        CHECK(states[m].chi.norm2() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(count_nodes(states[m].chi) == m);
    }
}

TEST_CASE("cutoff below the ground state yields an empty ladder") {
    const Grid1D rg = Grid1D::from_range(-3.0, 3.0, 101);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(rg.n_points);
    for (int j = 0; j < rg.n_points; ++j) w(j) = 0.5 * rg.point(j) * rg.point(j);
    CHECK(nuclear_states_from_potential(w, rg, 80.0, -1.0, 0).empty());
}

TEST_CASE("product wave function carries unit norm") {
    const ElectronicScan scan = separable_scan();
    const auto states = solve_nuclear(scan, 0, 100.0, 1.0);
    REQUIRE(!states.empty());
    const Eigen::MatrixXd psi = bo_total_wavefunction(scan, states[0]);
    CHECK(psi.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    // spot product structure
    const int i = 40, j = 17;
    CHECK(psi(i, j) ==
          doctest::Approx(scan.states[0](i, j) * states[0].chi.values(j)).epsilon(1e-14));
    CHECK(electronic_overlap(scan, 0, j, j) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("surface bounds are validated") {
    const ElectronicScan scan = separable_scan();
    CHECK_THROWS_AS(solve_nuclear(scan, 3, 100.0, 1.0), DomainError);
    VibronicState bad{7, 0, 0.0, {scan.r_grid, Eigen::VectorXd::Zero(scan.r_grid.n_points)}};
    CHECK_THROWS_AS(bo_total_wavefunction(scan, bad), DomainError);
}

TEST_CASE("minimum-gap search finds a synthetic crossing") {
    ElectronicScan scan;
    scan.r_grid = Grid1D::from_range(-2.0, 2.0, 41);
    scan.n_states = 2;
    scan.energies.resize(2, 41);
    for (int j = 0; j < 41; ++j) {
        const double r = scan.r_grid.point(j);
        // hyperbola branches with minimum gap 0.2 at R = 0.5
        const double d = r - 0.5;
        scan.energies(0, j) = -std::sqrt(d * d + 0.01);
        scan.energies(1, j) = std::sqrt(d * d + 0.01);
    }
    const CrossingInfo info = find_crossing(scan, 0, 1);
    CHECK(info.r == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(info.gap == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(info.energy_mid == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("shin-metiu surfaces order and avoided crossings on a coarse grid") {
    ShinMetiuModel model;
    const Grid1D xg = Grid1D::from_range(-22.0, 22.0, 201);
    const Grid1D rg = Grid1D::from_range(-8.9, 8.9, 151);
    const ElectronicScan scan = scan_electronic(electronic_problem(model), xg, rg, 3, 2);

    for (int j = 0; j < rg.n_points; ++j) {
        CHECK(scan.energies(0, j) < scan.energies(1, j));
        CHECK(scan.energies(1, j) < scan.energies(2, j));
    }
    const CrossingInfo lower = find_crossing(scan, 0, 1);
    CHECK(lower.r == doctest::Approx(-3.0).epsilon(0.05));
    CHECK(lower.gap < 0.02);
    const CrossingInfo upper = find_crossing(scan, 1, 2);
    CHECK(upper.r == doctest::Approx(1.2).epsilon(0.15));
    CHECK(upper.gap > lower.gap);
}
