#include "vibronic/born_huang.hpp"

#include <cmath>
#include <sstream>

#include "vibronic/errors.hpp"

namespace vib {

BhBasis make_bh_basis(const std::vector<std::vector<VibronicState>>& per_surface,
                      const Grid1D& r_grid) {
    BhBasis basis;
    basis.r_grid = r_grid;
    basis.chi.reserve(per_surface.size());

    int total = 0;
    for (const auto& states : per_surface) total += int(states.size());
    if (total == 0) throw AssemblyError("born_huang", "no channels below the cutoff");
    basis.channels.reserve(total);
    basis.diagonal_energies.resize(total);

    int c = 0;
    for (int s = 0; s < int(per_surface.size()); ++s) {
        const auto& states = per_surface[s];
        Eigen::MatrixXd cols(r_grid.n_points, states.size());
        for (int m = 0; m < int(states.size()); ++m) {
            if (states[m].chi.grid.n_points != r_grid.n_points)
                throw AssemblyError("born_huang", "channel grid does not match the basis grid");
            cols.col(m) = states[m].chi.values;
            basis.channels.push_back({s, states[m].m});
            basis.diagonal_energies(c++) = states[m].energy;
        }
        basis.chi.push_back(std::move(cols));
    }
    return basis;
}

SymmetricMatrix assemble_bh_matrix(const BhBasis& basis, const CouplingField& a,
                                   const CouplingField& b, double mass) {
    const int ns = int(basis.chi.size());
    if (a.n_states() < ns || b.n_states() < ns)
        throw AssemblyError("born_huang", "coupling fields cover fewer surfaces than the basis");
    if (a.r_grid().n_points != basis.r_grid.n_points)
        throw AssemblyError("born_huang", "coupling grid does not match the basis grid");
    if (mass <= 0) throw ConfigError("born_huang", "mass must be positive");

    const int total = int(basis.channels.size());
    const Eigen::MatrixXd d = spectral_derivative_matrix(basis.r_grid);

    std::vector<Eigen::MatrixXd> dchi(ns);
    for (int s = 0; s < ns; ++s) dchi[s] = d * basis.chi[s];

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(total, total);
    h.diagonal() = basis.diagonal_energies;

    std::vector<int> first(ns, 0);
    for (int s = 1; s < ns; ++s) first[s] = first[s - 1] + int(basis.chi[s - 1].cols());

    const double scale = 1.0 / (2.0 * mass);
    for (int n = 0; n < ns; ++n) {
        for (int np = 0; np < ns; ++np) {
            const Eigen::VectorXd& ad = a.comp(n, np);
            const Eigen::VectorXd& bd = b.comp(n, np);
            // (A d/dR + d/dR A + B) chi', column by column of surface np.
            Eigen::MatrixXd mc = ad.asDiagonal() * dchi[np];
            mc.noalias() += d * (ad.asDiagonal() * basis.chi[np]);
            mc.noalias() += bd.asDiagonal() * basis.chi[np];
            mc *= scale;
            h.block(first[n], first[np], basis.chi[n].cols(), basis.chi[np].cols()) +=
                basis.chi[n].transpose() * mc;
        }
    }

    const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (asym >= 1e-8) {
        std::ostringstream msg;
        msg << "assembled matrix asymmetry " << asym << " exceeds 1e-8";
        throw AssemblyError("born_huang", msg.str());
    }

    SymmetricMatrix sym(total, basis.r_grid);
    for (int i = 0; i < total; ++i)
        for (int j = 0; j <= i; ++j) sym.set(i, j, 0.5 * (h(i, j) + h(j, i)));
    return sym;
}

BhSolution solve_bh(const SymmetricMatrix& h, int n_lowest) {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    Eigen::MatrixXd dense = h.dense();
    dense_lowest_eigenpairs(dense, n_lowest, values, vectors);

    BhSolution sol;
    sol.energies = values;
    sol.lambda = vectors.transpose();
    sol.dominant_channel.resize(sol.lambda.rows());
    for (int i = 0; i < sol.lambda.rows(); ++i) {
        int k = 0;
        sol.lambda.row(i).cwiseAbs().maxCoeff(&k);
        // Dominant coefficient positive: fixes the eigenvector sign.
        if (sol.lambda(i, k) < 0) sol.lambda.row(i) = -sol.lambda.row(i);
        sol.dominant_channel[i] = k;
    }
    return sol;
}

Eigen::VectorXd surface_weights(const BhBasis& basis, const Eigen::VectorXd& lambda_row,
                                int n_surfaces) {
    if (lambda_row.size() != int(basis.channels.size()))
        throw AssemblyError("born_huang", "coefficient vector does not match the channel count");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_surfaces);
    for (int c = 0; c < lambda_row.size(); ++c) {
        const int s = basis.channels[c].surface;
        if (s < n_surfaces) w(s) += lambda_row(c) * lambda_row(c);
    }
    return w;
}

Eigen::MatrixXd bh_total_wavefunction(const ElectronicScan& scan, const BhBasis& basis,
                                      const Eigen::VectorXd& lambda_row) {
    if (lambda_row.size() != int(basis.channels.size()))
        throw AssemblyError("born_huang", "coefficient vector does not match the channel count");
    if (scan.r_grid.n_points != basis.r_grid.n_points)
        throw AssemblyError("born_huang", "scan grid does not match the basis grid");

    const int nx = scan.x_grid.n_points;
    const int nr = scan.r_grid.n_points;
    const int ns = int(basis.chi.size());

    // f_s(R) = sum over the surface's channels of lambda_c chi_c(R), then
    // Psi = sum_s phi_s .* f_s broadcast over x.
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(nx, nr);
    int c0 = 0;
    for (int s = 0; s < ns; ++s) {
        const int ms = int(basis.chi[s].cols());
        Eigen::VectorXd f = basis.chi[s] * lambda_row.segment(c0, ms);
        psi += scan.states[s] * f.asDiagonal();
        c0 += ms;
    }
    return psi;
}

}  // namespace vib
