#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fld/grid.hpp"

// Slow reference implementations for tests and `fld2d verify`. Nothing here
// calls the stencil, solver or kernel code.
namespace fld::oracle {

inline constexpr std::size_t kMaxDenseUnknowns = 10'000;

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major N x N system.
struct DenseSystem {
    std::size_t n = 0;
    std::vector<double> matrix;
    std::vector<double> rhs;

    DenseSystem() = default;
    explicit DenseSystem(std::size_t size);

    double& a(std::size_t i, std::size_t j) { return matrix[i * n + j]; }
    [[nodiscard]] double a(std::size_t i, std::size_t j) const { return matrix[i * n + j]; }
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
};

/// LU with partial pivoting. Throws SingularMatrixError when a pivot falls
/// below 1e-14 times the largest entry, std::length_error above the size
/// guard, and std::runtime_error if the residual check ||Ax-b|| <= 1e-10 ||b||
/// fails.
[[nodiscard]] std::vector<double> dense_solve(const DenseSystem& sys);

struct LstsqResult {
    std::vector<double> m;
    double residual = 0.0;
};

/// min ||A m - e||_2 by Householder QR. A is rows x cols, row-major,
/// rows >= cols, cols <= 16.
[[nodiscard]] LstsqResult dense_lstsq(std::span<const double> a, std::size_t rows, std::size_t cols,
                                      std::span<const double> e);

/// Same problem through the normal equations (Cholesky), for cross-checking.
[[nodiscard]] LstsqResult dense_lstsq_normal(std::span<const double> a, std::size_t rows,
                                             std::size_t cols, std::span<const double> e);

/// Left-to-right sum of x_i y_i.
[[nodiscard]] double sequential_dot(std::span<const double> x, std::span<const double> y);

/// Backward-Euler diffusion matrix I + dt (L + C) in dictionary ordering,
/// assembled directly from face coefficients.
///
/// d_east(i1, i2, s) is D on the face between global zones i1 and i1+1
/// (i1 = -1 .. nx1-1) and d_north likewise in x2; both are indexed
/// [(i2 + 1) * (nx1 + 1) + (i1 + 1)] * ns + s over an (nx1+1) x (nx2+1) array.
/// coupling is ns x ns row-major, the same in every zone. Dirichlet boundary
/// terms go to rhs_shift (to be added to the right-hand side).
struct DiffusionProblem {
    GridSpec grid;
    double dt = 0.0;
    std::vector<double> d_east;
    std::vector<double> d_north;
    std::vector<double> coupling;
    BoundaryCondition bc;

    /// Uniform D everywhere.
    static DiffusionProblem uniform(const GridSpec& grid, double dt, double d,
                                    std::vector<double> coupling, BoundaryCondition bc);
    [[nodiscard]] double& east(int i1, int i2, int s);
    [[nodiscard]] double& north(int i1, int i2, int s);
    [[nodiscard]] double east(int i1, int i2, int s) const;
    [[nodiscard]] double north(int i1, int i2, int s) const;
};

struct AssembledDiffusion {
    DenseSystem system;
    std::vector<double> rhs_shift;
};

[[nodiscard]] AssembledDiffusion dense_diffusion(const DiffusionProblem& p);

/// amplitude (sigma0^2 / s2) exp(-r^2 / (2 s2)), s2 = sigma0^2 + 2 d0 t,
/// sampled at zone centers in dictionary order.
[[nodiscard]] std::vector<double> gaussian_pulse(const GridSpec& grid, double x1c, double x2c,
                                                 double sigma0, double amplitude, double d0, double t);

[[nodiscard]] double norm2(std::span<const double> x);
[[nodiscard]] double max_abs_diff(std::span<const double> x, std::span<const double> y);

}  // namespace fld::oracle
