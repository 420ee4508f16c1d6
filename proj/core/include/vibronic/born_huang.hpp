#pragma once

#include <vector>

#include "vibronic/bo.hpp"
#include "vibronic/diabatic.hpp"

namespace vib {

struct BhChannel {
    int surface = 0;
    int m = 0;  // vibrational index within the surface
};

// Vibronic product basis: one column of chi[surface] per channel, flattened
// in surface-major order.
struct BhBasis {
    Grid1D r_grid;
    std::vector<BhChannel> channels;
    std::vector<Eigen::MatrixXd> chi;  // per surface, NR x (states on that surface)
    Eigen::VectorXd diagonal_energies;  // uncoupled channel energies, channel order
};

BhBasis make_bh_basis(const std::vector<std::vector<VibronicState>>& per_surface,
                      const Grid1D& r_grid);

// H = diag(W) + C with C blocks chi_n^T [ (A D + D A + B) / (2 mass) ] chi_n'.
// The raw assembly must be symmetric to 1e-8 before symmetrization.
SymmetricMatrix assemble_bh_matrix(const BhBasis& basis, const CouplingField& a,
                                   const CouplingField& b, double mass);

struct BhSolution {
    Eigen::VectorXd energies;
    Eigen::MatrixXd lambda;             // row per eigenstate, channel coefficients
    std::vector<int> dominant_channel;  // argmax |lambda| per eigenstate
};

BhSolution solve_bh(const SymmetricMatrix& h, int n_lowest);

// Per-surface weights sum_m lambda_{n,m}^2 for one eigenstate.
Eigen::VectorXd surface_weights(const BhBasis& basis, const Eigen::VectorXd& lambda_row,
                                int n_surfaces);

// Psi(x, R) = sum_c lambda_c phi_{s(c)}(x; R) chi_c(R).
Eigen::MatrixXd bh_total_wavefunction(const ElectronicScan& scan, const BhBasis& basis,
                                      const Eigen::VectorXd& lambda_row);

}  // namespace vib
