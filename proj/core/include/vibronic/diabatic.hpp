#pragma once

#include <vector>

#include "vibronic/bo.hpp"

namespace vib {

// Monotone erf-shaped mixing angle around one crossing.
struct RotationAngleModel {
    double K = 0.0;      // amplitude
    double K0 = 0.0;     // offset
    double r_c = 0.0;    // crossing center
    double gamma = 1.0;  // width

    double angle(double r) const;
    double dangle(double r) const;  // Gaussian derivative of the erf form
};

// Pairwise coupling components over the nuclear grid; comp(n, m) is an
// R-indexed vector, antisymmetric (first order) or symmetric (second order)
// in the state pair.
class CouplingField {
public:
    CouplingField() = default;
    CouplingField(int n_states, const Grid1D& r_grid);

    int n_states() const { return n_states_; }
    const Grid1D& r_grid() const { return r_grid_; }

    Eigen::VectorXd& comp(int n, int m) { return comp_[std::size_t(n) * n_states_ + m]; }
    const Eigen::VectorXd& comp(int n, int m) const {
        return comp_[std::size_t(n) * n_states_ + m];
    }

    int masked_points = 0;  // grid points zeroed by the degeneracy gap mask

private:
    int n_states_ = 0;
    Grid1D r_grid_;
    std::vector<Eigen::VectorXd> comp_;
};

// First-order couplings <phi_n | dU/dR | phi_m> / (E_m - E_n), diagonal zero,
// gap mask 1e-8.
CouplingField nac_hellmann_feynman(const ElectronicScan& scan, const ShinMetiuModel& model);

// B = A.A at each grid point.
CouplingField second_order_b(const CouplingField& a);

struct AngleFit {
    RotationAngleModel model;
    double rms_residual = 0.0;
    double fitted_amplitude = 0.0;  // raw least-squares K before pinning
};

// Least-squares fit of the Gaussian dangle form to the (0,1) and (1,2)
// coupling components. Amplitudes are pinned (pi/2 span for the sharp
// crossing, integral of the coupling for the broad one) and the angle offset
// puts the identity rotation on the side of the crossing holding the global
// minimum of the pair's lower surface, so that diabat keeps its deep well.
struct RotationFit {
    AngleFit theta;  // crossing between surfaces 0 and 1
    AngleFit phi;    // crossing between surfaces 1 and 2
};

RotationFit fit_rotation_angles(const CouplingField& a, const ElectronicScan& scan);

// Single-crossing free fit (K, R_c, Gamma) of dangle to the sampled coupling.
AngleFit fit_angle_derivative(const Eigen::VectorXd& coupling, const Grid1D& r_grid);

// Closed-form diabatic matrix for three surfaces under the two rotations.
Eigen::Matrix3d diabatic_matrix(const Eigen::Vector3d& adiabatic, double theta, double phi);

// Composed rotation: the theta block on surfaces (0,1) applied before the
// phi block on (1,2).
Eigen::Matrix3d rotation_matrix(double theta, double phi);

struct DiabaticField {
    Grid1D r_grid;
    Eigen::MatrixXd diagonal;      // 3 x NR
    Eigen::MatrixXd off_diagonal;  // rows: (0,1), (0,2), (1,2) couplings
};

DiabaticField diabatic_field(const ElectronicScan& scan, const RotationAngleModel& theta,
                             const RotationAngleModel& phi);

// phi^D_k = sum_n phi^A_n [U_T]_{nk}, one table per diabat.
std::vector<Eigen::MatrixXd> diabatic_states(const ElectronicScan& scan,
                                             const RotationAngleModel& theta,
                                             const RotationAngleModel& phi);

std::vector<VibronicState> diabatic_nuclear_solve(const Eigen::VectorXd& diabatic_potential,
                                                  const Grid1D& r_grid, double fgh_mass,
                                                  double cutoff, int surface_label);

}  // namespace vib
