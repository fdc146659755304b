#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fld/comm.hpp"
#include "fld/field.hpp"
#include "fld/kernels.hpp"
#include "fld/operator.hpp"
#include "fld/precond.hpp"

namespace fld {

/// Classic: textbook BiCGSTAB with the obvious pairing, 4 reduction events per
/// iteration. Ganged: same iterates in exact arithmetic, 2 events per iteration.
enum class BicgstabVariant { Classic, Ganged };

[[nodiscard]] std::string_view to_string(BicgstabVariant v) noexcept;
[[nodiscard]] BicgstabVariant parse_variant(std::string_view text);

/// Reduction events per iteration for each variant (excluding setup and
/// true-residual checks).
[[nodiscard]] constexpr int reductions_per_iteration(BicgstabVariant v) noexcept {
    return v == BicgstabVariant::Classic ? 4 : 2;
}

struct SolverConfig {
    double tol = 1e-8;
    /// Iteration cap; defaults to 10 sqrt(N) for N global unknowns.
    std::optional<int> max_iter;
    BicgstabVariant variant = BicgstabVariant::Ganged;
    PreconditionerKind precond = PreconditionerKind::Spai;
    kernels::KernelPath path = kernels::KernelPath::Vectorized;
    /// Start each pulse solve from the previous solution instead of zero.
    bool warm_start = false;

    void validate() const;
    [[nodiscard]] int resolved_max_iter(std::size_t unknowns) const;
};

enum class SolveOutcome { Converged, MaxIter, Breakdown };
enum class BreakdownKind { None, RhoZero, OmegaZero };

[[nodiscard]] std::string to_string(SolveOutcome outcome, BreakdownKind kind);

struct SolverStats {
    int iterations = 0;
    std::uint64_t reduction_events = 0;
    std::uint64_t matvec_count = 0;
    /// Reduction events spent before the first iteration (always 1).
    std::uint64_t setup_reduction_events = 0;
    /// True-residual recomputations (each costs one matvec and one reduction).
    int true_residual_checks = 0;
    /// Final iteration stopped after its first half (s small enough); the
    /// Classic variant then skips that iteration's residual-norm reduction.
    bool half_step_exit = false;
    /// Relative recursive residual after setup and after every iteration.
    std::vector<double> residual_history;
    SolveOutcome outcome = SolveOutcome::MaxIter;
    BreakdownKind breakdown = BreakdownKind::None;
    /// ||b - A x|| / ||b|| recomputed at exit (0 when b = 0).
    double final_relative_residual = 0.0;

    [[nodiscard]] bool converged() const noexcept { return outcome == SolveOutcome::Converged; }
};

/// Called after every full or half iteration with the current iterate.
using IterateObserver = std::function<void(int iteration, const Field& x)>;

/// Right-preconditioned BiCGSTAB on A M u = b, x = M u.
///
/// `x` holds the initial guess on entry and the solution on return. Collective:
/// every worker calls it with its own tile of A, M, b and x. Breakdown and
/// MaxIter are reported in the returned stats, never thrown.
SolverStats bicgstab(Communicator& comm, const OperatorSpec& a, const PreconditionerSpec& m,
                     const Field& b, Field& x, const SolverConfig& cfg,
                     const IterateObserver& observer = {});

/// Serial convenience for single-tile operands.
SolverStats bicgstab(const OperatorSpec& a, const PreconditionerSpec& m, const Field& b, Field& x,
                     const SolverConfig& cfg, const IterateObserver& observer = {});

/// Runs both variants for up to n_iters iterations from the same inputs and
/// returns the flattened iterates (Classic, Ganged) pairwise. The list stops at
/// the shorter run if either variant breaks down or converges early.
[[nodiscard]] std::vector<std::pair<std::vector<double>, std::vector<double>>>
bicgstab_variant_equivalence_probe(const OperatorSpec& a, const PreconditionerSpec& m,
                                   const Field& b, const Field& x0, int n_iters,
                                   kernels::KernelPath path = kernels::KernelPath::Vectorized);

}  // namespace fld
