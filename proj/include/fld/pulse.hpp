#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fld/comm.hpp"
#include "fld/field.hpp"
#include "fld/grid.hpp"
#include "fld/operator.hpp"
#include "fld/precond.hpp"
#include "fld/solver.hpp"

namespace fld {

/// Implicit diffusion of a 2-D Gaussian radiation pulse.
///
/// Each of the nsteps time steps is split into solves_per_step backward-Euler
/// sub-stages of dt / solves_per_step, each one operator build plus one
/// BiCGSTAB solve. Units: the light speed is 1 and the opacity is chosen so
/// that the unlimited diffusion coefficient c / (3 kappa) equals d0.
struct PulseProblem {
    GridSpec grid{};
    double sigma0 = 3.2;
    std::array<double, 2> center{100.0, 50.0};
    double amplitude = 1.0;
    double d0 = 1.0;
    double dt = 0.4;
    int nsteps = 100;
    int solves_per_step = 3;
    Limiter limiter = Limiter::None;
    /// Species exchange rate k: C = k (ns I - 1 1^T), columns summing to zero.
    double exchange = 0.0;
    BoundaryCondition bc = BoundaryCondition::zero_flux();
    SolverConfig solver{};

    /// Throws std::invalid_argument naming the offending parameter.
    void validate() const;

    [[nodiscard]] double light_speed() const noexcept { return 1.0; }
    [[nodiscard]] double opacity() const noexcept { return light_speed() / (3.0 * d0); }
    [[nodiscard]] double sigma_squared(double t) const noexcept { return sigma0 * sigma0 + 2.0 * d0 * t; }
    [[nodiscard]] double final_time() const noexcept { return dt * nsteps; }
    [[nodiscard]] int total_solves() const noexcept { return nsteps * solves_per_step; }
    /// Smallest distance from the pulse center to the domain boundary.
    [[nodiscard]] double boundary_distance() const noexcept;
};

/// amplitude exp(-|x - center|^2 / (2 sigma0^2)) at zone centers, every species.
[[nodiscard]] Field init_gaussian(const PulseProblem& problem, const TileBox& box, int tile_id = 0);
[[nodiscard]] Field init_gaussian(const PulseProblem& problem);

/// Free-space solution amplitude (sigma0^2 / sigma(t)^2) exp(-r^2 / (2 sigma(t)^2)),
/// sigma(t)^2 = sigma0^2 + 2 d0 t. Throws std::invalid_argument when the
/// limiter is on, species exchange is non-zero, the boundary is not zero-flux,
/// or the pulse center is closer than 5 sigma(t) to the boundary.
[[nodiscard]] Field analytic_solution(const PulseProblem& problem, double t, const TileBox& box,
                                      int tile_id = 0);
[[nodiscard]] Field analytic_solution(const PulseProblem& problem, double t);

struct StepResult {
    std::vector<SolverStats> stats;
    [[nodiscard]] bool ok() const;
};

/// Advances one tile's state through the sub-stages of successive steps.
///
/// With the limiter off every sub-stage operator is identical, so the
/// preconditioner is built once and reused; with the limiter on both are
/// rebuilt every sub-stage. Collective.
class PulseStepper {
public:
    PulseStepper(Communicator& comm, const PulseProblem& problem);

    /// Runs solves_per_step sub-stages; stops at the first non-converged solve.
    StepResult step(Field& state);

    [[nodiscard]] int preconditioner_builds() const noexcept { return precond_builds_; }

private:
    OperatorSpec build_operator(Field& state);

    Communicator& comm_;
    const PulseProblem& problem_;
    Field coupling_;
    std::optional<FaceCoefficients> static_faces_;
    std::optional<PreconditionerSpec> cached_precond_;
    int precond_builds_ = 0;
};

/// One step on a single tile covering the grid.
[[nodiscard]] StepResult step(Field& state, const PulseProblem& problem);

struct SolveRecord {
    int step = 0;
    int stage = 0;
    SolverStats stats;
};

struct RunReport {
    std::vector<SolveRecord> solves;
    Field initial_field;
    Field final_field;
    int steps_completed = 0;
    bool completed = false;
    std::string failure;
    double wall_time_s = 0.0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
    int preconditioner_builds = 0;
    int workers = 1;

    [[nodiscard]] bool all_converged() const;
    [[nodiscard]] std::uint64_t total_iterations() const;
    [[nodiscard]] std::uint64_t total_reductions() const;
    [[nodiscard]] std::uint64_t total_matvecs() const;
};

/// Called on the gathered global field after every `every`-th step.
struct SnapshotHook {
    int every = 0;
    std::function<void(int step, const Field& global)> sink;
};

/// Runs the full problem on the given topology (one worker thread per tile).
/// A failed solve stops the run and leaves a partial report.
[[nodiscard]] RunReport run(const PulseProblem& problem, const TileTopology& topology,
                            const SnapshotHook& snapshots = {});
[[nodiscard]] RunReport run(const PulseProblem& problem);

/// Flat binary snapshot: nx1, nx2, nspecies as little-endian int64, then the
/// values as little-endian float64 in (i2 outer, i1, species inner) order.
void write_field_snapshot(std::ostream& out, const Field& global);
[[nodiscard]] Field read_field_snapshot(std::istream& in, double dx1 = 1.0, double dx2 = 1.0);

/// Relative L2 distance ||a - b|| / ||b|| over the interior.
[[nodiscard]] double relative_l2_error(const Field& a, const Field& b);

}  // namespace fld
