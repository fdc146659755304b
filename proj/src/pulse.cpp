#include "fld/pulse.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include <fmt/core.h>

#include "fld/field_ops.hpp"

namespace fld {

void PulseProblem::validate() const {
    grid.validate();
    const double dxmax = std::max(grid.dx1, grid.dx2);
    if (!(sigma0 >= 3.0 * dxmax)) {
        throw std::invalid_argument(fmt::format(
            "problem.sigma0 = {} does not resolve the pulse (needs >= 3 max(dx) = {})", sigma0, 3.0 * dxmax));
    }
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
        throw std::invalid_argument(fmt::format("problem.amplitude must be positive (got {})", amplitude));
    }
    if (!(d0 >= 0.0) || !std::isfinite(d0)) {
        throw std::invalid_argument(fmt::format("problem.d0 must be >= 0 (got {})", d0));
    }
    if (limiter != Limiter::None && d0 == 0.0) {
        throw std::invalid_argument("problem.d0 must be positive when the limiter is on");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument(fmt::format("problem.dt must be positive (got {})", dt));
    }
    if (nsteps < 0) throw std::invalid_argument(fmt::format("problem.nsteps must be >= 0 (got {})", nsteps));
    if (solves_per_step < 1) {
        throw std::invalid_argument(
            fmt::format("problem.solves_per_step must be >= 1 (got {})", solves_per_step));
    }
    if (!(exchange >= 0.0) || !std::isfinite(exchange)) {
        throw std::invalid_argument(fmt::format("problem.exchange must be >= 0 (got {})", exchange));
    }
    if (!std::isfinite(center[0]) || !std::isfinite(center[1])) {
        throw std::invalid_argument("problem.center must be finite");
    }
    solver.validate();
}

double PulseProblem::boundary_distance() const noexcept {
    const double w = grid.nx1 * grid.dx1;
    const double h = grid.nx2 * grid.dx2;
    return std::min({center[0], w - center[0], center[1], h - center[1]});
}

namespace {

template <class Profile>
Field sample(const PulseProblem& p, const TileBox& box, int tile_id, Profile profile) {
    Field f(p.grid, box, p.grid.nspecies, tile_id);
    for (int i2 = 0; i2 < box.x2.length; ++i2) {
        const double x2 = (box.x2.start + i2 + 0.5) * p.grid.dx2 - p.center[1];
        for (int i1 = 0; i1 < box.x1.length; ++i1) {
            const double x1 = (box.x1.start + i1 + 0.5) * p.grid.dx1 - p.center[0];
            const double v = profile(x1 * x1 + x2 * x2);
            for (int s = 0; s < p.grid.nspecies; ++s) f(i1, i2, s) = v;
        }
    }
    return f;
}

TileBox whole(const GridSpec& g) { return {{0, g.nx1}, {0, g.nx2}}; }

}  // namespace

Field init_gaussian(const PulseProblem& p, const TileBox& box, int tile_id) {
    const double two_s2 = 2.0 * p.sigma0 * p.sigma0;
    return sample(p, box, tile_id, [&](double r2) { return p.amplitude * std::exp(-r2 / two_s2); });
}

Field init_gaussian(const PulseProblem& p) { return init_gaussian(p, whole(p.grid)); }

Field analytic_solution(const PulseProblem& p, double t, const TileBox& box, int tile_id) {
    if (p.limiter != Limiter::None) throw std::invalid_argument("analytic solution requires limiter = none");
    if (p.exchange != 0.0) throw std::invalid_argument("analytic solution requires exchange = 0");
    if (p.bc.kind != BoundaryCondition::Kind::ZeroFlux) {
        throw std::invalid_argument("analytic solution requires zero-flux boundaries");
    }
    if (!(t >= 0.0)) throw std::invalid_argument("analytic solution requires t >= 0");
    const double s2 = p.sigma_squared(t);
    if (p.boundary_distance() < 5.0 * std::sqrt(s2)) {
        throw std::invalid_argument(fmt::format(
            "pulse center is {} from the boundary, closer than 5 sigma(t) = {}", p.boundary_distance(),
            5.0 * std::sqrt(s2)));
    }
    const double peak = p.amplitude * p.sigma0 * p.sigma0 / s2;
    return sample(p, box, tile_id, [&](double r2) { return peak * std::exp(-r2 / (2.0 * s2)); });
}

Field analytic_solution(const PulseProblem& p, double t) { return analytic_solution(p, t, whole(p.grid)); }

bool StepResult::ok() const {
    return std::all_of(stats.begin(), stats.end(), [](const SolverStats& s) { return s.converged(); });
}

PulseStepper::PulseStepper(Communicator& comm, const PulseProblem& problem)
    : comm_(comm), problem_(problem) {
    const int ns = problem.grid.nspecies;
    std::vector<double> c(static_cast<std::size_t>(ns * ns), -problem.exchange);
    for (int s = 0; s < ns; ++s) c[static_cast<std::size_t>(s * ns + s)] = problem.exchange * (ns - 1);
    coupling_ = uniform_coupling(problem.grid, comm.box(), c, comm.rank());
    if (problem.limiter == Limiter::None) {
        static_faces_ = FaceCoefficients::uniform(problem.grid, comm.box(), ns, problem.d0, comm.rank());
    }
}

OperatorSpec PulseStepper::build_operator(Field& state) {
    const double h = problem_.dt / problem_.solves_per_step;
    if (static_faces_) return build_diffusion_operator(problem_.grid, *static_faces_, h, coupling_, problem_.bc);

    comm_.halo_exchange(state, problem_.bc);
    // The limiter needs a strictly positive density; round-off from the
    // linear solves can leave tiny negatives in the far field.
    Field floored = state;
    const double floor = 1e-30 * problem_.amplitude;
    for (double& v : floored.raw()) v = std::max(v, floor);
    const std::vector<double> kappa(static_cast<std::size_t>(problem_.grid.nspecies), problem_.opacity());
    const auto faces =
        flux_limited_D(floored, problem_.grid, kappa, problem_.light_speed(), problem_.limiter);
    return build_diffusion_operator(problem_.grid, faces, h, coupling_, problem_.bc);
}

StepResult PulseStepper::step(Field& state) {
    StepResult result;
    for (int stage = 0; stage < problem_.solves_per_step; ++stage) {
        const OperatorSpec op = build_operator(state);
        if (!static_faces_ || !cached_precond_) {
            cached_precond_ = build_preconditioner(comm_, problem_.solver.precond, op);
            ++precond_builds_;
        }
        Field b = state;
        field_ops::daxpy(problem_.solver.path, 1.0, op.boundary_source, state, b);
        Field x = state;
        if (!problem_.solver.warm_start) x.fill(0.0);
        result.stats.push_back(bicgstab(comm_, op, *cached_precond_, b, x, problem_.solver));
        if (!result.stats.back().converged()) break;
        state.assign_interior(x);
    }
    return result;
}

StepResult step(Field& state, const PulseProblem& problem) {
    Communicator comm(TileTopology::decompose(problem.grid, 1, 1));
    PulseStepper stepper(comm, problem);
    return stepper.step(state);
}

bool RunReport::all_converged() const {
    return std::all_of(solves.begin(), solves.end(), [](const SolveRecord& r) { return r.stats.converged(); });
}

std::uint64_t RunReport::total_iterations() const {
    std::uint64_t n = 0;
    for (const auto& r : solves) n += static_cast<std::uint64_t>(r.stats.iterations);
    return n;
}

std::uint64_t RunReport::total_reductions() const {
    std::uint64_t n = 0;
    for (const auto& r : solves) n += r.stats.reduction_events;
    return n;
}

std::uint64_t RunReport::total_matvecs() const {
    std::uint64_t n = 0;
    for (const auto& r : solves) n += r.stats.matvec_count;
    return n;
}

RunReport run(const PulseProblem& problem, const TileTopology& topology, const SnapshotHook& snapshots) {
    problem.validate();
    if (!(topology.grid() == problem.grid)) {
        throw std::invalid_argument("topology was built for a different grid");
    }

    RunReport report;
    report.workers = topology.size();
    report.initial_field = init_gaussian(problem);
    report.energy_initial = field_ops::local_sum(report.initial_field);

    std::vector<Field> finals(static_cast<std::size_t>(topology.size()));
    std::vector<Field> snapshot_tiles(static_cast<std::size_t>(topology.size()));
    std::mutex report_mutex;

    const auto t0 = std::chrono::steady_clock::now();
    run_workers(topology, [&](Communicator& comm) {
        Field state = init_gaussian(problem, comm.box(), comm.rank());
        PulseStepper stepper(comm, problem);
        const bool lead = comm.rank() == 0;
        for (int n = 0; n < problem.nsteps; ++n) {
            StepResult r = stepper.step(state);
            // Stats are replicated on every worker; the lead records them.
            if (lead) {
                std::lock_guard lock(report_mutex);
                for (std::size_t k = 0; k < r.stats.size(); ++k) {
                    report.solves.push_back({n, static_cast<int>(k), std::move(r.stats[k])});
                }
                if (r.ok()) report.steps_completed = n + 1;
            }
            if (!r.ok()) break;
            if (snapshots.every > 0 && snapshots.sink && (n + 1) % snapshots.every == 0) {
                snapshot_tiles[static_cast<std::size_t>(comm.rank())] = state;
                comm.barrier();
                if (lead) snapshots.sink(n + 1, gather(topology, snapshot_tiles));
                comm.barrier();
            }
        }
        finals[static_cast<std::size_t>(comm.rank())] = state;
        if (lead) report.preconditioner_builds = stepper.preconditioner_builds();
    });
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    report.final_field = gather(topology, finals);
    report.energy_final = field_ops::local_sum(report.final_field);
    report.completed = report.steps_completed == problem.nsteps;
    if (!report.completed) {
        const auto bad = std::find_if(report.solves.begin(), report.solves.end(),
                                      [](const SolveRecord& r) { return !r.stats.converged(); });
        if (bad != report.solves.end()) {
            report.failure = fmt::format("step {} stage {}: {} after {} iterations", bad->step, bad->stage,
                                         to_string(bad->stats.outcome, bad->stats.breakdown),
                                         bad->stats.iterations);
        }
    }
    return report;
}

RunReport run(const PulseProblem& problem) {
    return run(problem, TileTopology::decompose(problem.grid, 1, 1));
}

namespace {

template <class T>
void write_le(std::ostream& out, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits = 0;
    std::memcpy(&bits, &value, 8);
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

template <class T>
T read_le(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("truncated snapshot");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace

void write_field_snapshot(std::ostream& out, const Field& global) {
    if (global.box() != TileBox{{0, global.nx1()}, {0, global.nx2()}}) {
        throw std::invalid_argument("snapshots are written from a gathered global field");
    }
    write_le<std::int64_t>(out, global.nx1());
    write_le<std::int64_t>(out, global.nx2());
    write_le<std::int64_t>(out, global.ncomp());
    for (double v : global.flatten()) write_le<double>(out, v);
}

Field read_field_snapshot(std::istream& in, double dx1, double dx2) {
    const auto nx1 = read_le<std::int64_t>(in);
    const auto nx2 = read_le<std::int64_t>(in);
    const auto ns = read_le<std::int64_t>(in);
    if (nx1 < 1 || nx2 < 1 || ns < 1 || nx1 * nx2 * ns > (std::int64_t{1} << 32)) {
        throw std::runtime_error("snapshot header is not plausible");
    }
    GridSpec g{static_cast<int>(nx1), static_cast<int>(nx2), static_cast<int>(ns), dx1, dx2};
    Field f = Field::global(g, g.nspecies);
    std::vector<double> values(g.unknowns());
    for (double& v : values) v = read_le<double>(in);
    f.unflatten(values);
    return f;
}

double relative_l2_error(const Field& a, const Field& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("relative_l2_error: shape mismatch");
    double num = 0.0;
    double den = 0.0;
    for (int i2 = 0; i2 < a.len2(); ++i2) {
        const auto ra = a.row(i2);
        const auto rb = b.row(i2);
        for (std::size_t k = 0; k < ra.size(); ++k) {
            num += (ra[k] - rb[k]) * (ra[k] - rb[k]);
            den += rb[k] * rb[k];
        }
    }
    return std::sqrt(num / den);
}

}  // namespace fld
