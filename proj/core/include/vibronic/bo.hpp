#pragma once

#include <functional>
#include <vector>

#include "vibronic/grid.hpp"
#include "vibronic/model_potentials.hpp"

namespace vib {

// Electronic problem for the inner coordinate: U(x, R) plus the mass entering
// the electronic kinetic term.
struct ElectronicProblem {
    std::function<double(double, double)> potential;
    double electronic_mass = 1.0;
};

ElectronicProblem electronic_problem(const H2pModel& model);
ElectronicProblem electronic_problem(const ShinMetiuModel& model);

// Per-R electronic eigenpairs with phase continuity enforced along R.
struct ElectronicScan {
    Grid1D x_grid;
    Grid1D r_grid;
    int n_states = 0;
    Eigen::MatrixXd energies;            // n_states x NR
    std::vector<Eigen::MatrixXd> states; // per state: Nx x NR, discrete-normalized columns
};

ElectronicScan scan_electronic(const ElectronicProblem& problem, const Grid1D& x_grid,
                               const Grid1D& r_grid, int n_states, int threads = 1);

// One nuclear eigenfunction on one electronic surface.
struct VibronicState {
    int surface = 0;
    int m = 0;
    double energy = 0.0;
    GridFunction chi;
};

// All nuclear eigenstates with W < cutoff on the given potential, ascending.
std::vector<VibronicState> nuclear_states_from_potential(const Eigen::VectorXd& potential,
                                                         const Grid1D& r_grid, double fgh_mass,
                                                         double cutoff, int surface_label);

std::vector<VibronicState> solve_nuclear(const ElectronicScan& scan, int surface,
                                         double fgh_mass, double cutoff);

// Psi(x_i, R_j) = phi_n(x_i; R_j) chi(R_j), global discrete norm 1.
Eigen::MatrixXd bo_total_wavefunction(const ElectronicScan& scan, const VibronicState& state);

double electronic_overlap(const ElectronicScan& scan, int n, int r_index_a, int r_index_b);

// Sign changes of chi above a noise floor of 1e-6 max|chi|.
int count_nodes(const GridFunction& chi);

// Minimum-gap geometry between two adjacent surfaces.
struct CrossingInfo {
    int j_min = 0;
    double r = 0.0;
    double gap = 0.0;
    double energy_mid = 0.0;  // mean of the two surfaces at the minimum gap
};

CrossingInfo find_crossing(const ElectronicScan& scan, int lower, int upper);

}  // namespace vib
