#include "vibronic/grid.hpp"

#include <lapacke.h>

#include <cmath>
#include <sstream>

namespace vib {

namespace {
constexpr const char* kModule = "grid_core";
}

Grid1D::Grid1D(double r_min_, double delta_r_, int n_points_)
    : r_min(r_min_), delta_r(delta_r_), n_points(n_points_) {
    if (n_points < 1 || n_points % 2 == 0) {
        std::ostringstream os;
        os << "grid needs an odd point count >= 1, got n_points=" << n_points;
        throw ConfigError(kModule, os.str());
    }
    if (!(delta_r > 0.0)) {
        std::ostringstream os;
        os << "grid spacing must be positive, got delta_r=" << delta_r;
        throw ConfigError(kModule, os.str());
    }
}

Grid1D Grid1D::from_range(double lo, double hi, int n) {
    if (n < 2 || !(hi > lo))
        throw ConfigError(kModule, "grid range needs hi > lo and n >= 2");
    return Grid1D(lo, (hi - lo) / (n - 1), n);
}

double Grid1D::delta_k() const {
    return 2.0 * M_PI / (n_points * delta_r);
}

Eigen::VectorXd Grid1D::points() const {
    Eigen::VectorXd r(n_points);
    for (int i = 0; i < n_points; ++i) r[i] = point(i);
    return r;
}

GridFunction sample(const Grid1D& grid, const std::function<double(double)>& f) {
    GridFunction g{grid, Eigen::VectorXd(grid.n_points)};
    for (int i = 0; i < grid.n_points; ++i) g.values[i] = f(grid.point(i));
    return g;
}

SymmetricMatrix::SymmetricMatrix(int dim)
    : dim_(dim), grid_(0.0, 1.0, dim % 2 == 1 ? dim : dim + 1),
      tri_(std::size_t(dim) * (dim + 1) / 2, 0.0) {}

SymmetricMatrix::SymmetricMatrix(int dim, const Grid1D& grid)
    : dim_(dim), grid_(grid), tri_(std::size_t(dim) * (dim + 1) / 2, 0.0) {}

Eigen::MatrixXd SymmetricMatrix::dense() const {
    Eigen::MatrixXd m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = tri_[index(i, j)];
    return m;
}

Eigen::VectorXd fgh_kinetic_row(const Grid1D& grid, double mass) {
    if (!(mass > 0.0)) throw DomainError(kModule, "mass must be positive");
    const int n = grid.n_points;
    const double dk = grid.delta_k();
    const int half = (n - 1) / 2;
    Eigen::VectorXd t(half);
    for (int k = 1; k <= half; ++k) t[k - 1] = (k * dk) * (k * dk) / (2.0 * mass);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    for (int d = 0; d < n; ++d) {
        double acc = 0.0;
        for (int k = 1; k <= half; ++k) acc += std::cos(2.0 * M_PI * k * d / n) * t[k - 1];
        row[d] = (2.0 / n) * acc;
    }
    return row;
}

SymmetricMatrix build_fgh_hamiltonian(const Grid1D& grid, double mass,
                                      const GridFunction& potential) {
    const int n = grid.n_points;
    if (potential.values.size() != n)
        throw DomainError(kModule, "potential length does not match the grid");
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(potential.values[i])) {
            std::ostringstream os;
            os << "non-finite potential at grid index " << i;
            throw DomainError(kModule, os.str());
        }
    const Eigen::VectorXd row = fgh_kinetic_row(grid, mass);
    SymmetricMatrix h(n, grid);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) h.set(i, j, row[i - j]);
        h.set(i, i, row[0] + potential.values[i]);
    }
    return h;
}

void dense_lowest_eigenpairs(Eigen::MatrixXd& a, int n_lowest, Eigen::VectorXd& values,
                             Eigen::MatrixXd& vectors) {
    const int n = int(a.rows());
    values.resize(n_lowest);
    vectors.resize(n, n_lowest);
    std::vector<lapack_int> isuppz(2 * std::max(1, n_lowest));
    lapack_int found = 0;
    lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0,
                                     0.0, 1, n_lowest, 0.0, &found, values.data(),
                                     vectors.data(), n, isuppz.data());
    if (info != 0 || found != n_lowest) {
        std::ostringstream os;
        os << "symmetric eigensolver failed: info=" << info << " found=" << found
           << " requested=" << n_lowest << " dim=" << n;
        throw NumericError(kModule, os.str());
    }
}

std::vector<EigenPair> solve_symmetric(const SymmetricMatrix& matrix, int n_lowest) {
    const int n = matrix.dim();
    if (n_lowest < 1 || n_lowest > n) {
        std::ostringstream os;
        os << "n_lowest=" << n_lowest << " outside [1, " << n << "]";
        throw DomainError(kModule, os.str());
    }
    Eigen::MatrixXd a = matrix.dense();
    Eigen::VectorXd w;
    Eigen::MatrixXd z;
    dense_lowest_eigenpairs(a, n_lowest, w, z);
    std::vector<EigenPair> out;
    out.reserve(n_lowest);
    for (int k = 0; k < n_lowest; ++k)
        out.push_back({w[k], GridFunction{matrix.grid(), z.col(k)}});
    return out;
}

Eigen::MatrixXd spectral_derivative_matrix(const Grid1D& grid) {
    const int n = grid.n_points;
    const double dk = grid.delta_k();
    const int half = (n - 1) / 2;
    // row(d) for signed offset d = i - j; sine makes it exactly antisymmetric
    Eigen::VectorXd row(2 * n - 1);
    for (int d = -(n - 1); d <= n - 1; ++d) {
        double acc = 0.0;
        for (int k = 1; k <= half; ++k)
            acc += std::sin(2.0 * M_PI * k * d / n) * (k * dk);
        row[d + n - 1] = -(2.0 / n) * acc;
    }
    Eigen::MatrixXd dm(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dm(i, j) = row[i - j + n - 1];
    return dm;
}

}  // namespace vib
