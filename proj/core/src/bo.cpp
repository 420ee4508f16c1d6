#include "vibronic/bo.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace vib {

namespace {
constexpr const char* kModule = "bo_solver";
}

ElectronicProblem electronic_problem(const H2pModel& model) {
    return {[model](double x, double R) { return h2p_potential(model, x, R); },
            model.electron_reduced_mass};
}

ElectronicProblem electronic_problem(const ShinMetiuModel& model) {
    return {[model](double x, double R) { return shin_metiu_potential(model, x, R); }, 1.0};
}

ElectronicScan scan_electronic(const ElectronicProblem& problem, const Grid1D& x_grid,
                               const Grid1D& r_grid, int n_states, int threads) {
    if (n_states < 1 || n_states > x_grid.n_points)
        throw DomainError(kModule, "n_states outside [1, x_grid.n_points]");
    const int nx = x_grid.n_points;
    const int nr = r_grid.n_points;
    ElectronicScan scan;
    scan.x_grid = x_grid;
    scan.r_grid = r_grid;
    scan.n_states = n_states;
    scan.energies.resize(n_states, nr);
    scan.states.assign(n_states, Eigen::MatrixXd(nx, nr));

    const Eigen::VectorXd krow = fgh_kinetic_row(x_grid, problem.electronic_mass);

    std::mutex err_mutex;
    std::string first_error;
    std::atomic<int> next{0};
    auto worker = [&]() {
        Eigen::MatrixXd h(nx, nx);
        Eigen::VectorXd w;
        Eigen::MatrixXd z;
        for (;;) {
            const int j = next.fetch_add(1);
            if (j >= nr) return;
            const double R = r_grid.point(j);
            try {
                for (int c = 0; c < nx; ++c) {
                    const double v = problem.potential(x_grid.point(c), R);
                    if (!std::isfinite(v)) {
                        std::ostringstream os;
                        os << "non-finite potential at x index " << c << ", R=" << R;
                        throw DomainError(kModule, os.str());
                    }
                    for (int i = c; i < nx; ++i) h(i, c) = krow[i - c];
                    h(c, c) += v;
                }
                dense_lowest_eigenpairs(h, n_states, w, z);
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error.empty()) {
                    std::ostringstream os;
                    os << "electronic solve failed at R=" << R << ": " << e.what();
                    first_error = os.str();
                }
                return;
            }
            scan.energies.col(j) = w;
            for (int n = 0; n < n_states; ++n) scan.states[n].col(j) = z.col(n);
        }
    };

    const int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!first_error.empty()) throw NumericError(kModule, first_error);

    // sequential phase fix: keep consecutive-column overlaps positive
    for (int n = 0; n < n_states; ++n) {
        auto& phi = scan.states[n];
        for (int j = 1; j < nr; ++j)
            if (phi.col(j).dot(phi.col(j - 1)) < 0.0) phi.col(j) = -phi.col(j);
    }
    return scan;
}

std::vector<VibronicState> nuclear_states_from_potential(const Eigen::VectorXd& potential,
                                                         const Grid1D& r_grid, double fgh_mass,
                                                         double cutoff, int surface_label) {
    const int nr = r_grid.n_points;
    if (potential.size() != nr)
        throw DomainError(kModule, "potential length does not match the nuclear grid");
    const Eigen::VectorXd krow = fgh_kinetic_row(r_grid, fgh_mass);
    Eigen::MatrixXd h(nr, nr);
    for (int c = 0; c < nr; ++c) {
        for (int i = c; i < nr; ++i) h(i, c) = krow[i - c];
        h(c, c) += potential[c];
    }
    Eigen::VectorXd w;
    Eigen::MatrixXd z;
    dense_lowest_eigenpairs(h, nr, w, z);

    std::vector<VibronicState> states;
    for (int m = 0; m < nr && w[m] < cutoff; ++m)
        states.push_back({surface_label, m, w[m], GridFunction{r_grid, z.col(m)}});
    if (states.empty())
        std::cerr << "warning: [" << kModule << "] no nuclear states below cutoff=" << cutoff
                  << " on surface " << surface_label << " (ground state at " << w[0] << ")\n";
    return states;
}

std::vector<VibronicState> solve_nuclear(const ElectronicScan& scan, int surface,
                                         double fgh_mass, double cutoff) {
    if (surface < 0 || surface >= scan.n_states)
        throw DomainError(kModule, "surface index outside the scan");
    return nuclear_states_from_potential(scan.energies.row(surface).transpose(), scan.r_grid,
                                         fgh_mass, cutoff, surface);
}

Eigen::MatrixXd bo_total_wavefunction(const ElectronicScan& scan, const VibronicState& state) {
    if (state.surface < 0 || state.surface >= scan.n_states)
        throw DomainError(kModule, "state surface outside the scan");
    if (state.chi.values.size() != scan.r_grid.n_points)
        throw DomainError(kModule, "state chi length does not match the scan R grid");
    return scan.states[state.surface] * state.chi.values.asDiagonal();
}

double electronic_overlap(const ElectronicScan& scan, int n, int r_index_a, int r_index_b) {
    return scan.states[n].col(r_index_a).dot(scan.states[n].col(r_index_b));
}

int count_nodes(const GridFunction& chi) {
    const double floor = 1e-6 * chi.values.cwiseAbs().maxCoeff();
    int nodes = 0;
    double prev = 0.0;
    for (int i = 0; i < chi.values.size(); ++i) {
        const double v = chi.values[i];
        if (std::abs(v) <= floor) continue;
        if (prev != 0.0 && v * prev < 0.0) ++nodes;
        prev = v;
    }
    return nodes;
}

CrossingInfo find_crossing(const ElectronicScan& scan, int lower, int upper) {
    const Eigen::VectorXd gap =
        (scan.energies.row(upper) - scan.energies.row(lower)).transpose();
    int jmin = 0;
    gap.minCoeff(&jmin);
    CrossingInfo info;
    info.j_min = jmin;
    info.r = scan.r_grid.point(jmin);
    info.gap = gap[jmin];
    info.energy_mid = 0.5 * (scan.energies(upper, jmin) + scan.energies(lower, jmin));
    return info;
}

}  // namespace vib
