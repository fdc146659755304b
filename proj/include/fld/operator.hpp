#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fld/field.hpp"
#include "fld/grid.hpp"
#include "fld/kernels.hpp"

namespace fld {

/// Per-zone coefficients of a five-point, species-blocked stencil.
///
/// Row (z, s) of the operator is
///   diag x(z,s) + west x(z-e1,s) + east x(z+e1,s) + south x(z-e2,s)
///   + north x(z+e2,s) + sum_{s' != s} coupling(z, s*ns + s') x(z,s').
/// All arrays share the tile box of the field they act on; coupling diagonal
/// entries are always zero (they live in diag).
struct StencilCoefficients {
    Field diag;
    Field west;
    Field east;
    Field south;
    Field north;
    Field coupling;

    static StencilCoefficients zeros(const GridSpec& grid, const TileBox& box, int nspecies,
                                     int tile_id = 0);

    [[nodiscard]] int nspecies() const noexcept { return diag.ncomp(); }
    [[nodiscard]] const TileBox& box() const noexcept { return diag.box(); }
    [[nodiscard]] double max_abs() const;
};

/// Face-centered diffusion coefficients for one tile.
///
/// east(i1, i2, s) is D on the face between zones i1 and i1+1, defined for
/// i1 in [-1, len1-1]; north(i1, i2, s) likewise between i2 and i2+1. The
/// halo entries at -1 are the tile's west and south faces.
struct FaceCoefficients {
    Field east;
    Field north;

    static FaceCoefficients uniform(const GridSpec& grid, const TileBox& box, int nspecies,
                                    double d, int tile_id = 0);
};

/// Matrix-free system operator A for one tile (or the whole grid).
struct OperatorSpec {
    GridSpec grid;
    BoundaryCondition bc;
    double dt = 0.0;
    StencilCoefficients stencil;
    /// Right-hand-side contribution moved out of A by Dirichlet boundaries.
    Field boundary_source;

    [[nodiscard]] const TileBox& box() const noexcept { return stencil.box(); }
    [[nodiscard]] int nspecies() const noexcept { return stencil.nspecies(); }
};

/// Per-zone nspecies x nspecies coupling matrix repeated over a tile.
[[nodiscard]] Field uniform_coupling(const GridSpec& grid, const TileBox& box,
                                     std::span<const double> matrix, int tile_id = 0);

/// Backward-Euler diffusion operator A = I + dt (L + C).
///
/// Neighbor coefficients are -dt D_face / dx^2; diag is 1 minus their sum plus
/// dt C_ss. Out-of-domain neighbors are folded into diag for ZeroFlux and moved
/// to boundary_source for Dirichlet. Throws std::invalid_argument for dt <= 0,
/// negative or non-finite D, or non-finite coupling.
[[nodiscard]] OperatorSpec build_diffusion_operator(const GridSpec& grid,
                                                    const FaceCoefficients& faces, double dt,
                                                    const Field& coupling,
                                                    const BoundaryCondition& bc);

/// y = S x over the interior. x halos must be current; y halos are untouched.
void apply_stencil(const StencilCoefficients& s, const Field& x, Field& y,
                   kernels::KernelPath path = kernels::KernelPath::Vectorized);

inline void apply_operator(const OperatorSpec& op, const Field& x, Field& y,
                           kernels::KernelPath path = kernels::KernelPath::Vectorized) {
    apply_stencil(op.stencil, x, y, path);
}

/// Explicit sparse matrix in dictionary ordering (species, i1, i2).
struct AssembledMatrix {
    std::size_t n = 0;
    /// Row-wise (column, value) lists, columns ascending.
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;

    [[nodiscard]] std::size_t nonzeros() const;
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;
    /// Row-major dense copy.
    [[nodiscard]] std::vector<double> to_dense() const;
};

/// Largest grid the explicit assembly accepts (unknown count).
inline constexpr std::size_t kMaxAssembledUnknowns = 10'000;

/// Materializes a single-tile stencil; throws std::length_error above the size
/// guard and std::invalid_argument for a partial tile.
[[nodiscard]] AssembledMatrix assemble_banded(const StencilCoefficients& s, const GridSpec& grid);
[[nodiscard]] inline AssembledMatrix assemble_banded(const OperatorSpec& op) {
    return assemble_banded(op.stencil, op.grid);
}

enum class Limiter { None, LevermorePomraning };

[[nodiscard]] std::string_view to_string(Limiter limiter) noexcept;
[[nodiscard]] Limiter parse_limiter(std::string_view text);

/// lambda(R): 1/3 for None, (2 + R) / (6 + 3R + R^2) for LevermorePomraning.
[[nodiscard]] double limiter_lambda(Limiter limiter, double r) noexcept;

/// Face diffusion coefficients D = c lambda(R) / kappa with
/// R = |grad E| / (kappa E), face E by arithmetic mean of the two zones and
/// grad E by the normal difference. `energy` halos must be current.
/// Throws std::invalid_argument for non-positive face energy when the limiter
/// is active, or non-positive opacity / light speed.
[[nodiscard]] FaceCoefficients flux_limited_D(const Field& energy, const GridSpec& grid,
                                              std::span<const double> opacity, double light_speed,
                                              Limiter limiter);

}  // namespace fld
