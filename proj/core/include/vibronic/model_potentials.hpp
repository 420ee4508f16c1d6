#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vibronic/grid.hpp"

namespace vib {

inline constexpr double kProtonMass = 1836.152673;

// Two fixed protons at -R/2 and +R/2, one electron on x, soft-core Coulomb
// attraction with an R-dependent softening a(R) taken from a table.
struct H2pModel {
    double z_alpha = 1.0;
    double z_beta = 1.0;
    double proton_mass = kProtonMass;
    // electron mass reduced against the two protons
    double electron_reduced_mass = 2.0 * kProtonMass / (2.0 * kProtonMass + 1.0);
    std::vector<std::pair<double, double>> softening_table;  // (R, a), R ascending

    double softening(double r) const;  // linear interpolation, clamped outside
    double nuclear_fgh_mass() const { return proton_mass / 2.0; }
};

double h2p_potential(const H2pModel& model, double x, double R);

// Per-row bisection on a so the lowest electronic eigenvalue matches the
// reference energy (nuclear repulsion included) within 1e-6.
std::vector<std::pair<double, double>> calibrate_softening(
    const H2pModel& model, const std::vector<std::pair<double, double>>& reference_curve,
    const Grid1D& x_grid);

// Two ions fixed at -L/2 and +L/2, one moving ion at R, one electron on x;
// all electron attractions erf-screened.
struct ShinMetiuModel {
    double L = 18.897;
    double z_alpha = 1.0;
    double z_beta = 1.0;
    double z_gamma = 1.0;
    double rc_alpha = 3.00;
    double rc_beta = 2.20;
    double rc_gamma = 4.00;
    double moving_ion_mass = kProtonMass;
    double domain_margin = 0.5;  // keep-out around |R| = L/2

    double nuclear_fgh_mass() const { return moving_ion_mass; }
};

double shin_metiu_potential(const ShinMetiuModel& model, double x, double R);

// Analytic dU/dR (only the moving-ion attraction depends on both x and R;
// the ion-ion repulsion is x-independent and drops out of off-diagonal
// electronic matrix elements between orthogonal states).
double shin_metiu_dudr(const ShinMetiuModel& model, double x, double R);

// erf(|v|/rc)/|v| with its finite limit 2/(sqrt(pi) rc) at v = 0.
double screened_coulomb(double v, double rc);

}  // namespace vib
