#include <doctest.h>

#include <cmath>

#include "vibronic/grid.hpp"

using namespace vib;

namespace {

// Literal transcription of the kinetic sum, independent of the row-reuse
// implementation.
double kinetic_entry_direct(const Grid1D& g, double mass, int i, int j) {
    const int n = g.n_points;
    const double dk = g.delta_k();
    double sum = 0.0;
    for (int q = 1; q <= (n - 1) / 2; ++q) {
        const double t = (q * dk) * (q * dk) / (2.0 * mass);
        sum += std::cos(2.0 * M_PI * q * double(i - j) / n) * t;
    }
    return 2.0 / n * sum;
}

}  // namespace

TEST_CASE("grid construction and spacing") {
    Grid1D g = Grid1D::from_range(-2.0, 2.0, 5);
    CHECK(g.r_min == -2.0);
    CHECK(g.delta_r == doctest::Approx(1.0));
    CHECK(g.point(4) == doctest::Approx(2.0));
    CHECK(g.delta_k() == doctest::Approx(2.0 * M_PI / (5 * 1.0)));

    CHECK_THROWS_AS(Grid1D::from_range(0.0, 1.0, 4), ConfigError);
    CHECK_THROWS_AS(Grid1D::from_range(0.0, 1.0, -3), ConfigError);
    CHECK_THROWS_AS(Grid1D::from_range(1.0, 0.0, 5), ConfigError);
}

TEST_CASE("single-point grid reduces to the bare potential") {
    Grid1D g(0.7, 1.0, 1);
    GridFunction v = sample(g, [](double r) { return 3.25 + r; });
    SymmetricMatrix h = build_fgh_hamiltonian(g, 2.0, v);
    CHECK(h.dim() == 1);
    CHECK(h(0, 0) == doctest::Approx(3.95).epsilon(1e-15));
}

TEST_CASE("hamiltonian entries match the direct cosine sum") {
    Grid1D g = Grid1D::from_range(-1.0, 1.0, 7);
    GridFunction v = sample(g, [](double r) { return r * r; });
    const double mass = 1.7;
    SymmetricMatrix h = build_fgh_hamiltonian(g, mass, v);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) {
            double want = kinetic_entry_direct(g, mass, i, j);
            if (i == j) want += v.values(i);
            CHECK(h(i, j) == doctest::Approx(want).epsilon(1e-14));
        }
    }
}

TEST_CASE("kinetic part is toeplitz and positive semidefinite") {
    Grid1D g = Grid1D::from_range(-3.0, 3.0, 31);
    GridFunction zero = sample(g, [](double) { return 0.0; });
    SymmetricMatrix h = build_fgh_hamiltonian(g, 1.0, zero);
    for (int i = 0; i + 1 < 31; ++i)
        for (int j = 0; j + 1 < 31; ++j)
            CHECK(h(i, j) == doctest::Approx(h(i + 1, j + 1)).epsilon(1e-15));

    auto pairs = solve_symmetric(h, 5);
    for (const auto& p : pairs) CHECK(p.value >= -1e-12);
}

TEST_CASE("harmonic oscillator spectrum") {
    Grid1D g = Grid1D::from_range(-8.0, 8.0, 257);
    GridFunction v = sample(g, [](double r) { return 0.5 * r * r; });
    auto pairs = solve_symmetric(build_fgh_hamiltonian(g, 1.0, v), 5);
    REQUIRE(pairs.size() == 5);
    for (int m = 0; m < 5; ++m) {
        CHECK(pairs[m].value == doctest::Approx(m + 0.5).epsilon(1e-8));
        CHECK(pairs[m].vector.norm2() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // orthogonality in the discrete norm
    CHECK(std::abs(pairs[0].vector.values.dot(pairs[3].vector.values)) < 1e-10);
}

TEST_CASE("spectrum is translation invariant") {
    auto lowest = [](double shift) {
        Grid1D g = Grid1D::from_range(-8.0 + shift, 8.0 + shift, 257);
        GridFunction v = sample(g, [&](double r) { return 0.5 * (r - shift) * (r - shift); });
        return solve_symmetric(build_fgh_hamiltonian(g, 1.0, v), 3);
    };
    auto a = lowest(0.0), b = lowest(1.3);
    for (int m = 0; m < 3; ++m) CHECK(a[m].value == doctest::Approx(b[m].value).epsilon(1e-10));
}

TEST_CASE("eigenvalues come back ascending and vectors orthonormal") {
    Grid1D g = Grid1D::from_range(-5.0, 5.0, 101);
    GridFunction v = sample(g, [](double r) { return 0.3 * r * r + 0.1 * r * r * r * r; });
    auto pairs = solve_symmetric(build_fgh_hamiltonian(g, 1.5, v), 8);
    for (std::size_t m = 1; m < pairs.size(); ++m) CHECK(pairs[m].value >= pairs[m - 1].value);
    for (std::size_t a = 0; a < pairs.size(); ++a)
        for (std::size_t b = 0; b < a; ++b)
            CHECK(std::abs(pairs[a].vector.values.dot(pairs[b].vector.values)) < 1e-10);
}

TEST_CASE("non-finite potential is rejected with the grid point named") {
    Grid1D g = Grid1D::from_range(-1.0, 1.0, 5);
    GridFunction v = sample(g, [](double) { return 0.0; });
    v.values(2) = std::nan("");
    CHECK_THROWS_AS(build_fgh_hamiltonian(g, 1.0, v), DomainError);
}

TEST_CASE("requesting more eigenpairs than the dimension fails") {
    Grid1D g = Grid1D::from_range(-1.0, 1.0, 5);
    GridFunction v = sample(g, [](double r) { return r * r; });
    SymmetricMatrix h = build_fgh_hamiltonian(g, 1.0, v);
    CHECK_THROWS_AS(solve_symmetric(h, 6), Error);
    CHECK_THROWS_AS(solve_symmetric(h, 0), Error);
}

TEST_CASE("symmetric storage mirrors off-diagonal writes") {
    Grid1D g(0.0, 1.0, 3);
    SymmetricMatrix m(3, g);
    m.set(2, 0, 4.5);
    m.add(0, 2, 0.5);
    CHECK(m(0, 2) == doctest::Approx(5.0));
    CHECK(m(2, 0) == doctest::Approx(5.0));
    CHECK(m.grid().n_points == 3);
}

TEST_CASE("spectral derivative is exactly antisymmetric") {
    Grid1D g = Grid1D::from_range(-4.0, 4.0, 33);
    Eigen::MatrixXd d = spectral_derivative_matrix(g);
    CHECK((d + d.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectral derivative differentiates commensurate waves") {
    const int n = 65;
    Grid1D g(0.0, 1.0 / n, n);  // unit period
    Eigen::MatrixXd d = spectral_derivative_matrix(g);
    const double k = 2.0 * M_PI * 3.0;
    Eigen::VectorXd f(n), want(n);
    for (int i = 0; i < n; ++i) {
        f(i) = std::sin(k * g.point(i));
        want(i) = k * std::cos(k * g.point(i));
    }
    CHECK((d * f - want).cwiseAbs().maxCoeff() < 1e-8);

    // constants map to zero by the odd-offset pairing
    CHECK((d * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spectral derivative handles localized functions to high order") {
    Grid1D g = Grid1D::from_range(-10.0, 10.0, 401);
    Eigen::MatrixXd d = spectral_derivative_matrix(g);
    Eigen::VectorXd f(g.n_points), want(g.n_points);
    for (int i = 0; i < g.n_points; ++i) {
        const double x = g.point(i);
        f(i) = std::exp(-x * x);
        want(i) = -2.0 * x * std::exp(-x * x);
    }
    CHECK((d * f - want).cwiseAbs().maxCoeff() < 1e-10);
}
