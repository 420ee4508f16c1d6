#include "vibronic/schmidt.hpp"

#include <lapacke.h>

#include <cmath>
#include <iostream>
#include <sstream>

namespace vib {

namespace {

constexpr const char* kModule = "schmidt_entanglement";

Eigen::MatrixXd checked_copy(const Eigen::MatrixXd& psi) {
    if (!psi.allFinite()) throw DomainError(kModule, "non-finite amplitude in the state table");
    Eigen::MatrixXd a = psi;
    const double norm2 = a.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-6)
        std::cerr << "warning: [" << kModule << "] state norm^2 = " << norm2
                  << " deviates from 1; renormalizing\n";
    a /= std::sqrt(norm2);
    return a;
}

Eigen::VectorXd singular_values(Eigen::MatrixXd& a) {
    const int m = int(a.rows()), n = int(a.cols());
    Eigen::VectorXd s(std::min(m, n));
    const int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(),
                                    nullptr, m, nullptr, n);
    if (info != 0) {
        std::ostringstream os;
        os << "singular value decomposition failed: info=" << info;
        throw NumericError(kModule, os.str());
    }
    return s;
}

}  // namespace

Eigen::VectorXd schmidt_lambdas(const Eigen::MatrixXd& psi) {
    Eigen::MatrixXd a = checked_copy(psi);
    Eigen::VectorXd s = singular_values(a);
    return s.array().square();
}

SchmidtResult schmidt_decompose(const Eigen::MatrixXd& psi) {
    Eigen::MatrixXd a = checked_copy(psi);
    const int m = int(a.rows()), n = int(a.cols());
    const int k = std::min(m, n);
    SchmidtResult r;
    r.lambdas.resize(k);
    r.electronic_modes.resize(m, k);
    Eigen::MatrixXd vt(k, n);
    const int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m,
                                    r.lambdas.data(), r.electronic_modes.data(), m, vt.data(),
                                    k);
    if (info != 0) {
        std::ostringstream os;
        os << "singular value decomposition failed: info=" << info;
        throw NumericError(kModule, os.str());
    }
    r.nuclear_modes = vt.transpose();
    r.lambdas = r.lambdas.array().square();
    r.entropy = von_neumann_entropy(r.lambdas);
    return r;
}

double von_neumann_entropy(const Eigen::VectorXd& lambdas) {
    double sum = 0.0;
    for (int i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] < -1e-12) {
            std::ostringstream os;
            os << "eigenvalue " << lambdas[i] << " below the -1e-12 floor";
            throw DomainError(kModule, os.str());
        }
        sum += std::max(lambdas[i], 0.0);
    }
    if (std::abs(sum - 1.0) > 1e-4) {
        std::ostringstream os;
        os << "eigenvalue sum " << sum << " deviates from 1 by more than 1e-4";
        throw DomainError(kModule, os.str());
    }
    double s = 0.0;
    for (int i = 0; i < lambdas.size(); ++i) {
        const double l = lambdas[i];
        if (l > 1e-14) s -= l * std::log(l);
    }
    return s;
}

Eigen::MatrixXd reduced_density_nuclear_bo(const ElectronicScan& scan,
                                           const VibronicState& state) {
    const Eigen::MatrixXd& phi = scan.states[state.surface];
    const Eigen::VectorXd& chi = state.chi.values;
    Eigen::MatrixXd gram = phi.transpose() * phi;
    return (chi * chi.transpose()).cwiseProduct(gram);
}

Eigen::MatrixXd reduced_density_electronic(const Eigen::MatrixXd& psi) {
    return psi * psi.transpose();
}

Eigen::MatrixXd reduced_density_nuclear(const Eigen::MatrixXd& psi) {
    return psi.transpose() * psi;
}

std::vector<int> simplified_vibrational(const VibronicState& state) {
    const Eigen::VectorXd& chi = state.chi.values;
    const int n = int(chi.size());
    const double floor = 1e-3 * chi.cwiseAbs().maxCoeff();
    std::vector<int> extrema;
    for (int j = 1; j + 1 < n; ++j) {
        const double dl = chi[j] - chi[j - 1];
        const double dr = chi[j + 1] - chi[j];
        if (std::abs(chi[j]) > floor && dl * dr <= 0.0 && (dl != 0.0 || dr != 0.0))
            extrema.push_back(j);
    }
    if (int(extrema.size()) != state.m + 1) {
        std::ostringstream os;
        os << "found " << extrema.size() << " extrema for vibrational index m=" << state.m
           << " (expected " << state.m + 1
           << "); grid too coarse or state mislabeled";
        throw ExtractionError(kModule, os.str());
    }
    return extrema;
}

SimplifiedDensity simplified_density(const std::vector<int>& points,
                                     const ElectronicScan& scan, int n,
                                     const VibronicState& state) {
    const int k = int(points.size());
    SimplifiedDensity d;
    d.extrema_indices = points;
    d.amplitudes.resize(k);
    for (int i = 0; i < k; ++i) d.amplitudes[i] = state.chi.values[points[i]];
    d.amplitudes /= d.amplitudes.norm();

    const Eigen::MatrixXd& phi = scan.states[n];
    d.overlaps.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j <= i; ++j)
            d.overlaps(i, j) = d.overlaps(j, i) = phi.col(points[i]).dot(phi.col(points[j]));

    d.rho = (d.amplitudes * d.amplitudes.transpose()).cwiseProduct(d.overlaps);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.rho, Eigen::EigenvaluesOnly);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    d.entropy = von_neumann_entropy(lam);
    return d;
}

double perturbative_lambda_max(const SimplifiedDensity& simplified) {
    const Eigen::VectorXd& a = simplified.amplitudes;
    const int k = int(a.size());
    double lmax = 1.0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double eps = -a[i] * a[j] * (1.0 - simplified.overlaps(i, j));
            lmax += 2.0 * eps * a[i] * a[j];
        }
    return std::min(lmax, 1.0);
}

double two_eigenvalue_entropy(double lambda_max) {
    if (!(lambda_max > 0.0) || lambda_max > 1.0) {
        std::ostringstream os;
        os << "lambda_max=" << lambda_max << " outside (0, 1]";
        throw DomainError(kModule, os.str());
    }
    if (lambda_max >= 1.0) return 0.0;
    const double q = 1.0 - lambda_max;
    return -(lambda_max * std::log(lambda_max) + q * std::log(q));
}

Eigen::MatrixXd reduced_density_bh(const ElectronicScan& scan,
                                   const std::vector<std::pair<int, int>>& channels,
                                   const std::vector<Eigen::MatrixXd>& chi_per_surface,
                                   const Eigen::VectorXd& lambda) {
    if (int(channels.size()) != lambda.size())
        throw DomainError(kModule, "channel list and coefficient vector sizes differ");
    Eigen::VectorXd lam = lambda;
    const double norm2 = lam.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-6)
        std::cerr << "warning: [" << kModule << "] coefficient norm^2 = " << norm2
                  << " deviates from 1; renormalizing\n";
    lam /= std::sqrt(norm2);

    const int nr = scan.r_grid.n_points;
    const int ns = scan.n_states;
    // f_n(R) = sum_m Lambda_nm chi_nm(R)
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(nr, ns);
    for (int p = 0; p < int(channels.size()); ++p) {
        const auto& [n, m] = channels[p];
        f.col(n) += lam[p] * chi_per_surface[n].col(m);
    }
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(nr, nr);
    for (int n = 0; n < ns; ++n)
        for (int np = 0; np < ns; ++np) {
            Eigen::MatrixXd gram = scan.states[n].transpose() * scan.states[np];
            rho.noalias() +=
                (f.col(n) * f.col(np).transpose()).cwiseProduct(gram);
        }
    return rho;
}

}  // namespace vib
