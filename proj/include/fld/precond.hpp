#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "fld/comm.hpp"
#include "fld/field.hpp"
#include "fld/kernels.hpp"
#include "fld/operator.hpp"

namespace fld {

enum class PreconditionerKind { Identity, BlockJacobi, Spai };

[[nodiscard]] std::string_view to_string(PreconditionerKind kind) noexcept;
[[nodiscard]] PreconditionerKind parse_preconditioner(std::string_view text);

/// A per-zone diagonal block of the operator could not be inverted.
class SingularBlockError : public std::runtime_error {
public:
    SingularBlockError(int i1, int i2);
    [[nodiscard]] std::array<int, 2> zone() const noexcept { return zone_; }

private:
    std::array<int, 2> zone_;
};

/// Right preconditioner M ~ A^-1 for one tile.
struct PreconditionerSpec {
    PreconditionerKind kind = PreconditionerKind::Identity;
    /// BlockJacobi: row-major inverse of each zone's nspecies^2 diagonal block.
    Field block_inverse;
    /// Spai: M in the operator's own five-point block pattern.
    std::optional<StencilCoefficients> spai;
    /// Spai: per-column least-squares residual ||A m_j - e_j||_2 for owned columns.
    Field spai_residual;
    /// Spai: columns (all tiles) that fell back to the block-Jacobi column.
    std::size_t spai_fallbacks = 0;

    /// Whether apply needs current halos on its input.
    [[nodiscard]] bool needs_halo() const noexcept { return kind == PreconditionerKind::Spai; }
};

[[nodiscard]] PreconditionerSpec identity_preconditioner();

/// Inverts every zone's diagonal block (diag plus species coupling).
/// Throws SingularBlockError with the global zone index.
[[nodiscard]] PreconditionerSpec build_block_jacobi(const OperatorSpec& op);

/// Fixed-pattern sparse approximate inverse.
///
/// Column j = (z, s) of M is supported on (z, every species) and the four
/// spatial neighbors of z in species s, and minimizes ||A m_j - e_j||_2 by
/// normal equations with a relative pivot tolerance of 1e-12. Rank-deficient
/// columns fall back to the block-Jacobi column. Collective: exchanges
/// coefficient halos and reduces the fallback count.
[[nodiscard]] PreconditionerSpec build_spai(Communicator& comm, const OperatorSpec& op);
/// Serial convenience for a single-tile operator.
[[nodiscard]] PreconditionerSpec build_spai(const OperatorSpec& op);

[[nodiscard]] PreconditionerSpec build_preconditioner(Communicator& comm, PreconditionerKind kind,
                                                      const OperatorSpec& op);

/// out = M v over the interior. For Spai the halos of v must be current.
void apply_precond(const PreconditionerSpec& m, const Field& v, Field& out,
                   kernels::KernelPath path = kernels::KernelPath::Vectorized);

/// Relative pivot threshold for the per-column normal equations.
inline constexpr double kSpaiPivotTolerance = 1e-12;

}  // namespace fld
