#include "vibronic/model_potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vib {

namespace {
constexpr const char* kModule = "model_potentials";
}

double H2pModel::softening(double r) const {
    if (softening_table.empty())
        throw ConfigError(kModule, "softening table is empty; calibrate or load one first");
    const auto& t = softening_table;
    if (r <= t.front().first) return t.front().second;
    if (r >= t.back().first) return t.back().second;
    auto hi = std::upper_bound(t.begin(), t.end(), r,
                               [](double v, const auto& row) { return v < row.first; });
    auto lo = hi - 1;
    const double w = (r - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

double h2p_potential(const H2pModel& model, double x, double R) {
    if (!(R > 0.0)) {
        std::ostringstream os;
        os << "internuclear distance must be positive, got R=" << R;
        throw DomainError(kModule, os.str());
    }
    const double a = model.softening(R);
    const double dl = x + R / 2.0;
    const double dr = x - R / 2.0;
    return model.z_alpha * model.z_beta / R - model.z_alpha / std::sqrt(dl * dl + a) -
           model.z_beta / std::sqrt(dr * dr + a);
}

std::vector<std::pair<double, double>> calibrate_softening(
    const H2pModel& model, const std::vector<std::pair<double, double>>& reference_curve,
    const Grid1D& x_grid) {
    if (reference_curve.empty())
        throw CalibrationError(kModule, "reference curve is empty");
    const Eigen::VectorXd krow = fgh_kinetic_row(x_grid, model.electron_reduced_mass);
    const int n = x_grid.n_points;
    Eigen::MatrixXd h(n, n);
    Eigen::VectorXd w;
    Eigen::MatrixXd z;

    auto ground = [&](double R, double a) {
        H2pModel m = model;
        m.softening_table = {{R, a}};
        for (int j = 0; j < n; ++j) {
            const double vj = h2p_potential(m, x_grid.point(j), R);
            for (int i = j; i < n; ++i) h(i, j) = krow[i - j];
            h(j, j) += vj;
        }
        dense_lowest_eigenpairs(h, 1, w, z);
        return w[0];
    };

    std::vector<std::pair<double, double>> table;
    table.reserve(reference_curve.size());
    for (const auto& [R, eref] : reference_curve) {
        // a shallow well (larger a) raises the ground energy: f increases in a
        double lo = 0.5, hi = 2.5;
        double flo = ground(R, lo) - eref;
        double fhi = ground(R, hi) - eref;
        while (flo * fhi > 0.0) {
            if (std::abs(flo) < std::abs(fhi)) {
                lo /= 2.0;
                if (lo < 1e-3) {
                    std::ostringstream os;
                    os << "no softening bracket in [1e-3, 1e3] at R=" << R;
                    throw CalibrationError(kModule, os.str());
                }
                flo = ground(R, lo) - eref;
            } else {
                hi *= 2.0;
                if (hi > 1e3) {
                    std::ostringstream os;
                    os << "no softening bracket in [1e-3, 1e3] at R=" << R;
                    throw CalibrationError(kModule, os.str());
                }
                fhi = ground(R, hi) - eref;
            }
        }
        while (hi - lo > 1e-8) {
            const double mid = 0.5 * (lo + hi);
            if (ground(R, mid) - eref < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        const double a = 0.5 * (lo + hi);
        if (std::abs(ground(R, a) - eref) > 1e-6) {
            std::ostringstream os;
            os << "calibration residual above 1e-6 at R=" << R;
            throw CalibrationError(kModule, os.str());
        }
        table.emplace_back(R, a);
    }
    return table;
}

double screened_coulomb(double v, double rc) {
    const double d = std::abs(v);
    if (d < 1e-8) return 2.0 / (std::sqrt(M_PI) * rc);
    return std::erf(d / rc) / d;
}

double shin_metiu_potential(const ShinMetiuModel& model, double x, double R) {
    const double half = model.L / 2.0;
    if (std::abs(R) >= half - model.domain_margin) {
        std::ostringstream os;
        os << "moving ion at R=" << R << " too close to a fixed ion (|R| >= "
           << half - model.domain_margin << ")";
        throw DomainError(kModule, os.str());
    }
    return model.z_alpha * model.z_gamma / std::abs(R + half) +
           model.z_beta * model.z_gamma / std::abs(R - half) -
           model.z_alpha * screened_coulomb(x + half, model.rc_alpha) -
           model.z_beta * screened_coulomb(x - half, model.rc_beta) -
           model.z_gamma * screened_coulomb(x - R, model.rc_gamma);
}

double shin_metiu_dudr(const ShinMetiuModel& model, double x, double R) {
    const double half = model.L / 2.0;
    const double rc = model.rc_gamma;
    const double v = x - R;
    const double s = v / rc;
    // d/dv of erf(v/rc)/v; the small-|s| series keeps the odd function smooth
    // through v = 0 where the closed form is 0/0
    double hp;
    if (std::abs(s) >= 0.1) {
        hp = 2.0 / (std::sqrt(M_PI) * rc) * std::exp(-s * s) / v - std::erf(s) / (v * v);
    } else {
        const double s2 = s * s;
        hp = (2.0 / (std::sqrt(M_PI) * rc * rc)) *
             s * (-2.0 / 3.0 + s2 * (2.0 / 5.0 + s2 * (-1.0 / 7.0 + s2 / 27.0)));
    }
    // d/dR[-z_g h(x-R)] = +z_g h'(x-R); ion-ion terms are x-independent
    const double ion = -model.z_alpha * model.z_gamma / ((R + half) * (R + half)) +
                       model.z_beta * model.z_gamma / ((R - half) * (R - half));
    return model.z_gamma * hp + ion;
}

}  // namespace vib
