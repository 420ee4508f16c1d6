#include "vibronic/diabatic.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "vibronic/errors.hpp"
#include "vibronic/model_potentials.hpp"

namespace vib {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kGapMask = 1e-8;

double trapezoid(const Eigen::VectorXd& y, double dx) {
    double s = y.sum() - 0.5 * (y(0) + y(y.size() - 1));
    return s * dx;
}

}  // namespace

double RotationAngleModel::angle(double r) const {
    return K * std::erf((r - r_c) / gamma) + K0;
}

double RotationAngleModel::dangle(double r) const {
    double u = (r - r_c) / gamma;
    return 2.0 * K / (kSqrtPi * gamma) * std::exp(-u * u);
}

CouplingField::CouplingField(int n_states, const Grid1D& r_grid)
    : n_states_(n_states), r_grid_(r_grid) {
    if (n_states < 1) throw ConfigError("diabatization", "coupling field needs n_states >= 1");
    comp_.assign(std::size_t(n_states) * n_states,
                 Eigen::VectorXd::Zero(r_grid.n_points));
}

CouplingField nac_hellmann_feynman(const ElectronicScan& scan, const ShinMetiuModel& model) {
    const int ns = int(scan.states.size());
    const int nr = scan.r_grid.n_points;
    const int nx = scan.x_grid.n_points;
    CouplingField a(ns, scan.r_grid);

    Eigen::VectorXd du(nx);
    for (int j = 0; j < nr; ++j) {
        const double r = scan.r_grid.point(j);
        for (int i = 0; i < nx; ++i) du(i) = shin_metiu_dudr(model, scan.x_grid.point(i), r);
        for (int n = 0; n < ns; ++n) {
            for (int m = n + 1; m < ns; ++m) {
                const double gap = scan.energies(m, j) - scan.energies(n, j);
                if (std::abs(gap) <= kGapMask) {
                    ++a.masked_points;
                    continue;
                }
                const double num =
                    (scan.states[n].col(j).array() * du.array() * scan.states[m].col(j).array())
                        .sum();
                const double val = num / gap;
                a.comp(n, m)(j) = val;
                a.comp(m, n)(j) = -val;
            }
        }
    }
    if (a.masked_points > 0)
        std::fprintf(stderr,
                     "[diabatization] warning: %d grid points under the degeneracy gap mask\n",
                     a.masked_points);
    return a;
}

CouplingField second_order_b(const CouplingField& a) {
    const int ns = a.n_states();
    CouplingField b(ns, a.r_grid());
    for (int n = 0; n < ns; ++n)
        for (int m = 0; m < ns; ++m) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(a.r_grid().n_points);
            for (int l = 0; l < ns; ++l) acc += a.comp(n, l).cwiseProduct(a.comp(l, m));
            b.comp(n, m) = acc;
        }
    return b;
}

AngleFit fit_angle_derivative(const Eigen::VectorXd& coupling, const Grid1D& r_grid) {
    const int nr = r_grid.n_points;
    if (coupling.size() != nr)
        throw ConfigError("diabatization", "coupling sample does not match the nuclear grid");

    int j_pk = 0;
    coupling.cwiseAbs().maxCoeff(&j_pk);
    const double peak = coupling(j_pk);
    if (std::abs(peak) < 1e-300)
        throw NumericError("diabatization", "coupling is identically zero, nothing to fit");

    // 1/e points around the peak seed the width.
    const double drop = std::abs(peak) / std::exp(1.0);
    int j_lo = j_pk;
    while (j_lo > 0 && std::abs(coupling(j_lo)) > drop) --j_lo;
    int j_hi = j_pk;
    while (j_hi < nr - 1 && std::abs(coupling(j_hi)) > drop) ++j_hi;
    const double dr = r_grid.delta_r;
    double g0 = std::max(dr, 0.5 * (j_hi - j_lo) * dr);

    double K = peak * kSqrtPi * g0 / 2.0;
    double rc = r_grid.point(j_pk);
    double gamma = g0;

    Eigen::VectorXd resid(nr);
    Eigen::MatrixXd jac(nr, 3);
    auto eval = [&](double k_, double rc_, double g_, bool with_jac) {
        double cost = 0.0;
        for (int j = 0; j < nr; ++j) {
            const double u = (r_grid.point(j) - rc_) / g_;
            const double base = 2.0 / (kSqrtPi * g_) * std::exp(-u * u);
            const double g = k_ * base;
            resid(j) = g - coupling(j);
            cost += resid(j) * resid(j);
            if (with_jac) {
                jac(j, 0) = base;
                jac(j, 1) = g * 2.0 * u / g_;
                jac(j, 2) = g * (2.0 * u * u - 1.0) / g_;
            }
        }
        return 0.5 * cost;
    };

    std::vector<double> history;
    double cost = eval(K, rc, gamma, true);
    history.push_back(std::sqrt(2.0 * cost / nr));
    double lambda = 1e-3;
    bool converged = false;
    for (int outer = 0; outer < 300 && !converged; ++outer) {
        Eigen::Matrix3d jtj = jac.transpose() * jac;
        Eigen::Vector3d jtr = jac.transpose() * resid;
        bool accepted = false;
        for (int inner = 0; inner < 60; ++inner) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal();
            Eigen::Vector3d step = damped.ldlt().solve(-jtr);
            const double k_n = K + step(0), rc_n = rc + step(1), g_n = gamma + step(2);
            if (g_n > 0.0) {
                const double cost_n = eval(k_n, rc_n, g_n, false);
                if (cost_n < cost) {
                    const double rel = step.cwiseAbs().maxCoeff() /
                                       (1.0 + std::max({std::abs(K), std::abs(rc), gamma}));
                    K = k_n;
                    rc = rc_n;
                    gamma = g_n;
                    cost = cost_n;
                    lambda = std::max(lambda / 3.0, 1e-14);
                    accepted = true;
                    if (rel < 1e-12) converged = true;
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        cost = eval(K, rc, gamma, true);
        history.push_back(std::sqrt(2.0 * cost / nr));
        if (!accepted) {
            const int n = int(history.size());
            if (n >= 2 && history[n - 1] <= history[n - 2] * (1.0 + 1e-12)) {
                converged = true;  // stalled at the floor: no downhill step exists
            } else {
                std::ostringstream msg;
                msg << "angle fit failed to converge; rms history:";
                for (std::size_t i = 0; i < history.size(); ++i) {
                    if (history.size() > 12 && i == 6) {
                        msg << " ...";
                        i = history.size() - 6;
                    }
                    msg << ' ' << history[i];
                }
                throw NumericError("diabatization", msg.str());
            }
        }
    }

    AngleFit out;
    out.model = RotationAngleModel{K, 0.0, rc, gamma};
    out.rms_residual = history.back();
    out.fitted_amplitude = K;
    return out;
}

RotationFit fit_rotation_angles(const CouplingField& a, const ElectronicScan& scan) {
    if (a.n_states() < 3)
        throw ConfigError("diabatization", "three electronic states are needed for the two-angle fit");
    const Grid1D& rg = a.r_grid();

    RotationFit fit;
    fit.theta = fit_angle_derivative(a.comp(0, 1), rg);
    fit.phi = fit_angle_derivative(a.comp(1, 2), rg);

    // Sharp lower crossing swaps the pair completely: pin the span to pi/2.
    const double k_theta = (fit.theta.fitted_amplitude < 0 ? -1.0 : 1.0) * M_PI / 4.0;
    // Broad upper crossing mixes partially: the span is the integrated coupling.
    const double k_phi = 0.5 * trapezoid(a.comp(1, 2), rg.delta_r);

    // Identity side: the lower adiabat of each pair keeps its global minimum
    // untouched, so the rotation vanishes on that side of the crossing.
    auto offset = [&](int lower_surface, double r_c, double k) {
        int j_min = 0;
        scan.energies.row(lower_surface).minCoeff(&j_min);
        const bool min_on_right = scan.r_grid.point(j_min) > r_c;
        return min_on_right ? -k : k;
    };

    fit.theta.model.K = k_theta;
    fit.theta.model.K0 = offset(0, fit.theta.model.r_c, k_theta);
    fit.phi.model.K = k_phi;
    fit.phi.model.K0 = offset(1, fit.phi.model.r_c, k_phi);
    return fit;
}

Eigen::Matrix3d rotation_matrix(double theta, double phi) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double cf = std::cos(phi), sf = std::sin(phi);
    Eigen::Matrix3d u1, u2;
    u1 << c, s, 0, -s, c, 0, 0, 0, 1;
    u2 << 1, 0, 0, 0, cf, sf, 0, -sf, cf;
    return u1 * u2;
}

Eigen::Matrix3d diabatic_matrix(const Eigen::Vector3d& adiabatic, double theta, double phi) {
    const double v1 = adiabatic(0), v2 = adiabatic(1), v3 = adiabatic(2);
    const double c = std::cos(theta), s = std::sin(theta);
    const double cf = std::cos(phi), sf = std::sin(phi);
    const double mixed = v1 * s * s + v2 * c * c;

    Eigen::Matrix3d d;
    d(0, 0) = v1 * c * c + v2 * s * s;
    d(1, 1) = mixed * cf * cf + v3 * sf * sf;
    d(2, 2) = mixed * sf * sf + v3 * cf * cf;
    d(0, 1) = 0.5 * (v1 - v2) * std::sin(2.0 * theta) * cf;
    d(0, 2) = 0.5 * (v1 - v2) * std::sin(2.0 * theta) * sf;
    d(1, 2) = 0.5 * (mixed - v3) * std::sin(2.0 * phi);
    d(1, 0) = d(0, 1);
    d(2, 0) = d(0, 2);
    d(2, 1) = d(1, 2);
    return d;
}

DiabaticField diabatic_field(const ElectronicScan& scan, const RotationAngleModel& theta,
                             const RotationAngleModel& phi) {
    if (scan.states.size() < 3)
        throw ConfigError("diabatization", "diabatic field needs three electronic surfaces");
    const int nr = scan.r_grid.n_points;
    DiabaticField f;
    f.r_grid = scan.r_grid;
    f.diagonal.resize(3, nr);
    f.off_diagonal.resize(3, nr);
    for (int j = 0; j < nr; ++j) {
        const double r = scan.r_grid.point(j);
        Eigen::Matrix3d d = diabatic_matrix(Eigen::Vector3d(scan.energies.col(j).head<3>()),
                                            theta.angle(r), phi.angle(r));
        f.diagonal(0, j) = d(0, 0);
        f.diagonal(1, j) = d(1, 1);
        f.diagonal(2, j) = d(2, 2);
        f.off_diagonal(0, j) = d(0, 1);
        f.off_diagonal(1, j) = d(0, 2);
        f.off_diagonal(2, j) = d(1, 2);
    }
    return f;
}

std::vector<Eigen::MatrixXd> diabatic_states(const ElectronicScan& scan,
                                             const RotationAngleModel& theta,
                                             const RotationAngleModel& phi) {
    if (scan.states.size() < 3)
        throw ConfigError("diabatization", "diabatic states need three electronic surfaces");
    const int nr = scan.r_grid.n_points;
    const int nx = scan.x_grid.n_points;
    std::vector<Eigen::MatrixXd> out(3, Eigen::MatrixXd::Zero(nx, nr));
    for (int j = 0; j < nr; ++j) {
        const double r = scan.r_grid.point(j);
        const Eigen::Matrix3d u = rotation_matrix(theta.angle(r), phi.angle(r));
        for (int k = 0; k < 3; ++k)
            for (int n = 0; n < 3; ++n)
                if (u(n, k) != 0.0) out[k].col(j) += u(n, k) * scan.states[n].col(j);
    }
    return out;
}

std::vector<VibronicState> diabatic_nuclear_solve(const Eigen::VectorXd& diabatic_potential,
                                                  const Grid1D& r_grid, double fgh_mass,
                                                  double cutoff, int surface_label) {
    return nuclear_states_from_potential(diabatic_potential, r_grid, fgh_mass, cutoff,
                                         surface_label);
}

}  // namespace vib
