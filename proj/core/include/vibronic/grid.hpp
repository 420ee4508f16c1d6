#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "vibronic/errors.hpp"

namespace vib {

// Uniform 1D coordinate grid. The kinetic cosine sum requires an odd point
// count; N = 1 is allowed (empty sum, pure potential).
struct Grid1D {
    double r_min = 0.0;
    double delta_r = 1.0;
    int n_points = 1;

    Grid1D() = default;
    Grid1D(double r_min_, double delta_r_, int n_points_);

    static Grid1D from_range(double lo, double hi, int n);

    double point(int i) const { return r_min + i * delta_r; }
    double delta_k() const;
    Eigen::VectorXd points() const;
};

// Real amplitudes sampled on a grid, discrete norm sum(values^2) = 1 when
// normalized.
struct GridFunction {
    Grid1D grid;
    Eigen::VectorXd values;

    double norm2() const { return values.squaredNorm(); }
};

GridFunction sample(const Grid1D& grid, const std::function<double(double)>& f);

// Dense real symmetric matrix storing one triangle; mirror access keeps
// M_ij == M_ji exact.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(int dim);
    SymmetricMatrix(int dim, const Grid1D& grid);

    int dim() const { return dim_; }
    const Grid1D& grid() const { return grid_; }

    double operator()(int i, int j) const { return tri_[index(i, j)]; }
    void set(int i, int j, double v) { tri_[index(i, j)] = v; }
    void add(int i, int j, double v) { tri_[index(i, j)] += v; }

    Eigen::MatrixXd dense() const;

private:
    std::size_t index(int i, int j) const {
        if (i < j) std::swap(i, j);
        return std::size_t(i) * (i + 1) / 2 + j;
    }

    int dim_ = 0;
    Grid1D grid_;
    std::vector<double> tri_;
};

struct EigenPair {
    double value;
    GridFunction vector;
};

// H_ij = (2/N) sum_{n=1..(N-1)/2} cos(2 pi n (i-j)/N) (n dk)^2/(2 mass) + V_i delta_ij
SymmetricMatrix build_fgh_hamiltonian(const Grid1D& grid, double mass,
                                      const GridFunction& potential);

// Kinetic part only, as a function of the offset |i-j|. Row reuse makes
// repeated per-column solves cheap.
Eigen::VectorXd fgh_kinetic_row(const Grid1D& grid, double mass);

// Lowest n eigenpairs, ascending, vectors orthonormal in the discrete norm.
std::vector<EigenPair> solve_symmetric(const SymmetricMatrix& matrix, int n_lowest);

// Backend entry point: eigenpairs [0, n_lowest) of a dense symmetric matrix
// given by its lower triangle in 'a' (column-major, overwritten).
void dense_lowest_eigenpairs(Eigen::MatrixXd& a, int n_lowest, Eigen::VectorXd& values,
                             Eigen::MatrixXd& vectors);

// Antisymmetric first-derivative matrix with FGH accuracy, D = -D^T exact.
Eigen::MatrixXd spectral_derivative_matrix(const Grid1D& grid);

}  // namespace vib
