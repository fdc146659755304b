#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fld/operator.hpp"
#include "fld/oracle.hpp"
#include "fld/precond.hpp"

namespace fld::verify {

/// A small random diffusion system described twice: as oracle input and as
/// the production operator built from the same face coefficients.
struct RandomCase {
    oracle::DiffusionProblem problem;
    OperatorSpec op;
};

struct RandomCaseLimits {
    int max_nx1 = 8;
    int max_nx2 = 7;
    int max_nspecies = 2;
    /// Draw Dirichlet boundaries for about half the cases.
    bool allow_dirichlet = true;
};

/// Grid, dx, dt, face D, a column-sum-zero (generally nonsymmetric) species
/// coupling, and the boundary condition are all drawn from `rng`.
[[nodiscard]] RandomCase random_case(std::mt19937_64& rng, const RandomCaseLimits& limits = {});

/// Production FaceCoefficients holding the oracle problem's face values.
[[nodiscard]] FaceCoefficients faces_from(const oracle::DiffusionProblem& p);

/// Dense copy of a single-tile operator's matrix, through the oracle assembly.
[[nodiscard]] oracle::DenseSystem dense_operator(const RandomCase& c);

/// Least-squares residual of column j over the SPAI pattern, by dense QR.
[[nodiscard]] double spai_column_oracle_residual(const oracle::DenseSystem& a, const GridSpec& grid,
                                                 std::size_t column);

/// ||A b_j - e_j|| for column j of the block-Jacobi inverse.
[[nodiscard]] double block_jacobi_column_residual(const oracle::DenseSystem& a, const GridSpec& grid,
                                                  std::size_t column);

/// ||A m_j - e_j|| for column j of an assembled preconditioner.
[[nodiscard]] double column_residual(const oracle::DenseSystem& a, const AssembledMatrix& m,
                                     std::size_t column);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

enum class Fault { None, PerturbStencil };

struct VerifyOptions {
    /// nullopt runs every check; an empty list runs none.
    std::optional<std::vector<std::string>> checks;
    std::uint64_t seed = 20240611;
    Fault fault = Fault::None;
};

[[nodiscard]] const std::vector<std::string>& check_names();

/// Throws std::invalid_argument for an unknown check name.
[[nodiscard]] std::vector<CheckResult> run_checks(const VerifyOptions& options);

}  // namespace fld::verify
