#pragma once

#include <utility>
#include <vector>

#include "vibronic/bo.hpp"

namespace vib {

// Schmidt spectrum and paired modes of one bipartite amplitude table.
struct SchmidtResult {
    Eigen::VectorXd lambdas;          // descending, sums to 1
    Eigen::MatrixXd electronic_modes; // x side, one column per mode
    Eigen::MatrixXd nuclear_modes;    // R side, one column per mode
    double entropy = 0.0;             // nats
};

SchmidtResult schmidt_decompose(const Eigen::MatrixXd& psi);

// Squared singular values only; the cheap path when modes are not needed.
Eigen::VectorXd schmidt_lambdas(const Eigen::MatrixXd& psi);

double von_neumann_entropy(const Eigen::VectorXd& lambdas);

inline double schmidt_entropy(const Eigen::MatrixXd& psi) {
    return von_neumann_entropy(schmidt_lambdas(psi));
}

// rho^R_ij = chi_i chi_j S_n(R_i, R_j)
Eigen::MatrixXd reduced_density_nuclear_bo(const ElectronicScan& scan,
                                           const VibronicState& state);

// Generic reduced densities of a bipartite table: psi psi^T (electronic side)
// and psi^T psi (nuclear side); used for dual-trace cross-checks.
Eigen::MatrixXd reduced_density_electronic(const Eigen::MatrixXd& psi);
Eigen::MatrixXd reduced_density_nuclear(const Eigen::MatrixXd& psi);

// Vibrational amplitudes collapsed onto the extrema of chi, renormalized.
struct SimplifiedDensity {
    std::vector<int> extrema_indices;  // R-grid indices, ascending
    Eigen::VectorXd amplitudes;        // chi at the extrema, sum of squares 1
    Eigen::MatrixXd rho;               // (m+1) x (m+1)
    Eigen::MatrixXd overlaps;          // S_n between extrema points
    double entropy = 0.0;
};

// Interior extrema of chi by discrete-derivative sign change, amplitude
// floor 1e-3 max|chi|; exactly m+1 points or an extraction error.
std::vector<int> simplified_vibrational(const VibronicState& state);

SimplifiedDensity simplified_density(const std::vector<int>& points,
                                     const ElectronicScan& scan, int n,
                                     const VibronicState& state);

// lambda_max = 1 + 2 sum_{k<l} eps_kl a_k a_l, eps_kl = -a_k a_l (1 - S_kl)
double perturbative_lambda_max(const SimplifiedDensity& simplified);

// Entropy of the spectrum {lambda, 1 - lambda}.
double two_eigenvalue_entropy(double lambda_max);

// Nuclear-side reduced density of a coupled-channel state: Lambda indexes
// channels (surface n, vibrational m) with per-surface chi column matrices.
Eigen::MatrixXd reduced_density_bh(const ElectronicScan& scan,
                                   const std::vector<std::pair<int, int>>& channels,
                                   const std::vector<Eigen::MatrixXd>& chi_per_surface,
                                   const Eigen::VectorXd& lambda);

}  // namespace vib
