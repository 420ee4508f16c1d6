#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "vibronic/bo.hpp"
#include "vibronic/schmidt.hpp"

using namespace vib;

TEST_CASE("maximally entangled two-by-two state") {
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(2, 2);
    psi(0, 0) = psi(1, 1) = 1.0 / std::sqrt(2.0);
    const SchmidtResult r = schmidt_decompose(psi);
    CHECK(r.lambdas(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.lambdas(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("product states carry zero entropy") {
    Eigen::VectorXd u(6), v(9);
    for (int i = 0; i < 6; ++i) u(i) = std::sin(1.0 + i);
    for (int j = 0; j < 9; ++j) v(j) = std::cos(0.3 * j);
    u.normalize();
    v.normalize();
    const Eigen::MatrixXd psi = u * v.transpose();
    const Eigen::VectorXd lam = schmidt_lambdas(psi);
    CHECK(lam(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(schmidt_entropy(psi) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("uniform rank-four spectrum gives log 4") {
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(4, 7);
    for (int k = 0; k < 4; ++k) psi(k, k) = 0.5;
    CHECK(schmidt_entropy(psi) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("weights sum to one and match both reduced densities") {
    Eigen::MatrixXd psi(7, 5);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 5; ++j) psi(i, j) = std::sin(3.0 * i + 1.0) * std::cos(2.0 * j) +
                                                0.2 * std::sin(double(i * j) + 0.4);
    psi /= std::sqrt(psi.squaredNorm());

    const Eigen::VectorXd lam = schmidt_lambdas(psi);
    CHECK(lam.sum() == doctest::Approx(1.0).epsilon(1e-12));

    const Eigen::MatrixXd re = reduced_density_electronic(psi);
    const Eigen::MatrixXd rn = reduced_density_nuclear(psi);
    CHECK(re.trace() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rn.trace() == doctest::Approx(1.0).epsilon(1e-12));

    // both partial traces share the squared singular values
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rn);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    for (int k = 0; k < lam.size(); ++k)
        CHECK(ev(k) == doctest::Approx(lam(k)).epsilon(1e-10));

    // decomposition reassembles the state
    const SchmidtResult r = schmidt_decompose(psi);
    Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(7, 5);
    for (int k = 0; k < r.lambdas.size(); ++k)
        rebuilt += std::sqrt(r.lambdas(k)) * r.electronic_modes.col(k) *
                   r.nuclear_modes.col(k).transpose();
    CHECK((rebuilt - psi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("entropy input validation") {
    Eigen::VectorXd bad(2);
    bad << 1.1, -0.1;
    CHECK_THROWS_AS(von_neumann_entropy(bad), DomainError);
    Eigen::VectorXd short_sum(2);
    short_sum << 0.5, 0.remaining;
    CHECK_THROWS_AS(von_neumann_entropy(short_sum), DomainError);

    Eigen::MatrixXd nan_psi = Eigen::MatrixXd::Zero(2, 2);
    nan_psi(0, 0) = std::nan("");
    CHECK_THROWS_AS(schmidt_lambdas(nan_psi), DomainError);
}

TEST_CASE("two-point spectrum entropy") {
    // frozen: -0.9 ln 0.9 - 0.1 ln 0.1
    CHECK(two_eigenvalue_entropy(0.9) == doctest::Approx(0.3250829733914482).epsilon(1e-12));
    CHECK(two_eigenvalue_entropy(1.0) == 0.0);
    CHECK(two_eigenvalue_entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(two_eigenvalue_entropy(1.5), DomainError);
    CHECK_THROWS_AS(two_eigenvalue_entropy(0.0), DomainError);
}

TEST_CASE("largest weight from pairwise overlap deficits") {
    SimplifiedDensity sd;
    sd.amplitudes.resize(2);
    sd.amplitudes << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    sd.overlaps = Eigen::MatrixXd::Identity(2, 2);
    sd.overlaps(0, 1) = sd.overlaps(1, 0) = 0.98;
    // eps = -a1 a2 (1 - S): lambda = 1 + 2 eps a1 a2 = 1 - 2 a1^2 a2^2 (1 - S)
    const double want = 1.0 - 2.0 * 0.25 * (1.0 - 0.98);
    CHECK(perturbative_lambda_max(sd) == doctest::Approx(want).epsilon(1e-14));
}

namespace {

// Two-surface separable scan where the electronic state is R-independent:
// every overlap is 1 and the simplified density must be pure.
ElectronicScan constant_scan() {
    ElectronicScan scan;
    scan.x_grid = Grid1D::from_range(-8.0, 8.0, 65);
    scan.r_grid = Grid1D::from_range(-3.0, 3.0, 201);
    scan.n_states = 1;
    scan.energies = Eigen::MatrixXd::Zero(1, 201);
    Eigen::VectorXd phi(65);
    for (int i = 0; i < 65; ++i) {
        const double x = scan.x_grid.point(i);
        phi(i) = std::exp(-0.5 * x * x);
    }
    phi.normalize();
    Eigen::MatrixXd cols(65, 201);
    for (int j = 0; j < 201; ++j) cols.col(j) = phi;
    scan.states.push_back(cols);
    return scan;
}

}  // namespace

TEST_CASE("simplified density on an r-independent electronic state") {
    const ElectronicScan scan = constant_scan();
    Eigen::VectorXd w(201);
    for (int j = 0; j < 201; ++j) w(j) = 0.5 * scan.r_grid.point(j) * scan.r_grid.point(j);
    const auto states = nuclear_states_from_potential(w, scan.r_grid, 80.0, 0.6, 0);
    REQUIRE(states.size() >= 4);

    const auto& st = states[3];
    const auto points = simplified_vibrational(st);
    CHECK(int(points.size()) == st.m + 1);

    const SimplifiedDensity sd = simplified_density(points, scan, 0, st);
    CHECK(sd.amplitudes.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    // overlaps are exactly 1, so the density is a pure projector
    CHECK(sd.entropy == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(perturbative_lambda_max(sd) == doctest::Approx(1.0).epsilon(1e-12));

    // the full decomposition agrees: a product state carries no entanglement
    const Eigen::MatrixXd psi = bo_total_wavefunction(scan, st);
    CHECK(schmidt_entropy(psi) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("extraction fails when the label disagrees with the node pattern") {
    const Grid1D rg = Grid1D::from_range(-3.0, 3.0, 201);
    Eigen::VectorXd w(201);
    for (int j = 0; j < 201; ++j) w(j) = 0.5 * rg.point(j) * rg.point(j);
    auto states = nuclear_states_from_potential(w, rg, 80.0, 0.6, 0);
    REQUIRE(states.size() >= 4);
    VibronicState mislabeled = states[3];
    mislabeled.m = 1;
    CHECK_THROWS_AS(simplified_vibrational(mislabeled), ExtractionError);
}

TEST_CASE("coupled-channel reduced density reduces to the product case") {
    const ElectronicScan scan = constant_scan();
    Eigen::VectorXd w(201);
    for (int j = 0; j < 201; ++j) w(j) = 0.5 * scan.r_grid.point(j) * scan.r_grid.point(j);
    const auto states = nuclear_states_from_potential(w, scan.r_grid, 80.0, 0.6, 0);

    std::vector<std::pair<int, int>> channels = {{0, 0}, {0, 1}};
    Eigen::MatrixXd chi(201, 2);
    chi.col(0) = states[0].chi.values;
    chi.col(1) = states[1].chi.values;

    Eigen::VectorXd lam(2);
    lam << 1.0, 0.0;
    const Eigen::MatrixXd rho = reduced_density_bh(scan, channels, {chi}, lam);
    const Eigen::MatrixXd want =
        states[0].chi.values * states[0].chi.values.transpose();  // S_n = 1 everywhere
    CHECK((rho - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
}
