#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fld/field_ops.hpp"
#include "fld/oracle.hpp"
#include "fld/pulse.hpp"

using namespace fld;

namespace {

PulseProblem small_problem() {
    PulseProblem p;
    p.grid = {40, 30, 2, 1.0, 1.0};
    p.center = {20.0, 15.0};
    p.sigma0 = 3.0;
    p.dt = 0.2;
    p.nsteps = 3;
    return p;
}

}  // namespace

TEST(Pulse, DefaultsDescribeThe300SolveWorkload) {
    PulseProblem p;
    EXPECT_EQ(p.grid, GridSpec{});
    EXPECT_EQ(p.nsteps, 100);
    EXPECT_EQ(p.solves_per_step, 3);
    EXPECT_EQ(p.total_solves(), 300);
    EXPECT_NO_THROW(p.validate());
    // Width grows about 3x while staying 5 sigma inside the boundary.
    const double growth = std::sqrt(p.sigma_squared(p.final_time())) / p.sigma0;
    EXPECT_GT(growth, 2.5);
    EXPECT_LT(growth, 3.5);
    EXPECT_GE(p.boundary_distance(), 5.0 * std::sqrt(p.sigma_squared(p.final_time())));
}

TEST(Pulse, ValidateNamesOffendingParameter) {
    PulseProblem p;
    p.sigma0 = 2.0;
    try {
        p.validate();
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("sigma0"), std::string::npos);
    }
    p = {};
    p.solves_per_step = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.dt = -1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Pulse, InitialGaussianValues) {
    PulseProblem p;
    p.center = {100.5, 50.5};  // on a zone center
    const Field e = init_gaussian(p);
    EXPECT_DOUBLE_EQ(e(100, 50, 0), p.amplitude);
    EXPECT_DOUBLE_EQ(e(100, 50, 1), p.amplitude);
    // sigma0 = 3.2 is not a zone offset; compare at a sampled radius instead.
    const double r = 3.0;
    EXPECT_NEAR(e(103, 50, 0), p.amplitude * std::exp(-r * r / (2 * p.sigma0 * p.sigma0)), 1e-15);
    PulseProblem q = p;
    q.sigma0 = 4.0;
    EXPECT_NEAR(init_gaussian(q)(104, 50, 1), q.amplitude * std::exp(-0.5), 1e-15);
}

TEST(Pulse, InitialEnergyMatchesGaussianIntegral) {
    PulseProblem p;
    const double zone_sum = field_ops::local_sum(init_gaussian(p)) / p.grid.nspecies;
    const double integral = p.amplitude * 2.0 * std::numbers::pi * p.sigma0 * p.sigma0;
    EXPECT_NEAR(zone_sum / integral, 1.0, 1e-6);
}

TEST(Pulse, AnalyticSolution) {
    PulseProblem p;
    const Field a0 = analytic_solution(p, 0.0);
    EXPECT_EQ(a0.flatten(), init_gaussian(p).flatten());
    const double t_double = p.sigma0 * p.sigma0 / (2.0 * p.d0);
    EXPECT_DOUBLE_EQ(p.sigma_squared(t_double), 2.0 * p.sigma0 * p.sigma0);
    // Matches the oracle evaluation and the 2-D peak decay sigma0^2 / sigma^2.
    const double t = 10.0;
    const auto ref = oracle::gaussian_pulse(p.grid, p.center[0], p.center[1], p.sigma0, p.amplitude, p.d0, t);
    EXPECT_LE(oracle::max_abs_diff(analytic_solution(p, t).flatten(), ref), 1e-15);
    PulseProblem c = p;
    c.center = {100.5, 50.5};
    EXPECT_DOUBLE_EQ(analytic_solution(c, t)(100, 50, 0),
                     c.amplitude * c.sigma0 * c.sigma0 / c.sigma_squared(t));
}

TEST(Pulse, AnalyticSolutionRefusesInvalidSetups) {
    PulseProblem p;
    p.limiter = Limiter::LevermorePomraning;
    EXPECT_THROW((void)analytic_solution(p, 1.0), std::invalid_argument);
    p = {};
    p.exchange = 0.1;
    EXPECT_THROW((void)analytic_solution(p, 1.0), std::invalid_argument);
    p = {};
    EXPECT_THROW((void)analytic_solution(p, 1000.0), std::invalid_argument);
    p.center = {10.0, 50.0};
    EXPECT_THROW((void)analytic_solution(p, 0.0), std::invalid_argument);
}

TEST(Pulse, NoDiffusionLeavesStateUnchanged) {
    PulseProblem p = small_problem();
    p.d0 = 0.0;
    Field e = init_gaussian(p);
    const auto before = e.flatten();
    const auto r = step(e, p);
    ASSERT_EQ(r.stats.size(), 3u);
    for (const auto& s : r.stats) {
        EXPECT_TRUE(s.converged());
        EXPECT_LE(s.iterations, 1);
    }
    EXPECT_LE(oracle::max_abs_diff(e.flatten(), before), 1e-14);
}

TEST(Pulse, ConstantFieldIsSteady) {
    PulseProblem p = small_problem();
    p.solver.tol = 1e-13;
    Field e = Field::global(p.grid, 2, 0.7);
    EXPECT_TRUE(step(e, p).ok());
    for (double v : e.flatten()) EXPECT_NEAR(v, 0.7, 1e-12);
    // From a warm start the constant is already the solution.
    p.solver.warm_start = true;
    Field w = Field::global(p.grid, 2, 0.7);
    const auto r = step(w, p);
    for (const auto& s : r.stats) EXPECT_EQ(s.iterations, 0);
    for (double v : w.flatten()) EXPECT_EQ(v, 0.7);
}

TEST(Pulse, OneStepConservesEnergy) {
    for (double k : {0.0, 0.5}) {
        PulseProblem p = small_problem();
        p.exchange = k;
        p.solver.tol = 1e-12;
        Field e = init_gaussian(p);
        // Unequal species so the exchange term actually moves energy.
        for (int i2 = 0; i2 < p.grid.nx2; ++i2)
            for (int i1 = 0; i1 < p.grid.nx1; ++i1) e(i1, i2, 1) *= 0.25;
        const double e0 = field_ops::local_sum(e);
        ASSERT_TRUE(step(e, p).ok());
        EXPECT_NEAR(field_ops::local_sum(e) / e0, 1.0, 1e-10) << "exchange " << k;
    }
}

TEST(Pulse, RunWithZeroStepsReturnsInitialField) {
    PulseProblem p = small_problem();
    p.nsteps = 0;
    const auto r = run(p);
    EXPECT_TRUE(r.completed);
    EXPECT_TRUE(r.solves.empty());
    EXPECT_EQ(r.final_field.flatten(), r.initial_field.flatten());
}

TEST(Pulse, RunRecordsEverySolve) {
    PulseProblem p = small_problem();
    const auto r = run(p);
    ASSERT_EQ(r.solves.size(), 9u);
    EXPECT_TRUE(r.completed);
    EXPECT_TRUE(r.all_converged());
    EXPECT_EQ(r.preconditioner_builds, 1);
    for (std::size_t k = 0; k < r.solves.size(); ++k) {
        EXPECT_EQ(r.solves[k].step, static_cast<int>(k / 3));
        EXPECT_EQ(r.solves[k].stage, static_cast<int>(k % 3));
    }
    std::uint64_t iters = 0;
    for (const auto& s : r.solves) iters += static_cast<std::uint64_t>(s.stats.iterations);
    EXPECT_EQ(r.total_iterations(), iters);
}

TEST(Pulse, FailedSolveStopsRunWithPartialReport) {
    PulseProblem p = small_problem();
    p.solver.tol = 1e-30;
    p.solver.max_iter = 2;
    const auto r = run(p);
    EXPECT_FALSE(r.completed);
    EXPECT_EQ(r.steps_completed, 0);
    ASSERT_EQ(r.solves.size(), 1u);
    EXPECT_EQ(r.solves[0].stats.outcome, SolveOutcome::MaxIter);
    EXPECT_NE(r.failure.find("max_iter"), std::string::npos);
}

TEST(Pulse, TiledRunMatchesSerial) {
    PulseProblem p = small_problem();
    p.solver.tol = 1e-12;
    const auto serial = run(p);
    const auto tiled = run(p, TileTopology::decompose(p.grid, 4, 3));
    EXPECT_EQ(tiled.workers, 12);
    double scale = 0.0;
    for (double v : serial.final_field.flatten()) scale = std::max(scale, std::abs(v));
    EXPECT_LE(oracle::max_abs_diff(tiled.final_field.flatten(), serial.final_field.flatten()), 1e-9 * scale);
}

TEST(Pulse, StaysNonNegative) {
    PulseProblem p = small_problem();
    p.nsteps = 5;
    const auto r = run(p);
    for (double v : r.final_field.flatten()) EXPECT_GE(v, -1e-12 * p.amplitude);
}

TEST(Pulse, LimiterSmokeRun) {
    PulseProblem p = small_problem();
    p.limiter = Limiter::LevermorePomraning;
    p.exchange = 0.1;
    const auto r = run(p, TileTopology::decompose(p.grid, 2, 2));
    EXPECT_TRUE(r.completed);
    EXPECT_EQ(r.preconditioner_builds, 9);
    EXPECT_NEAR(r.energy_final / r.energy_initial, 1.0, 1e-7);
    // The limiter slows spreading relative to unlimited diffusion.
    PulseProblem q = small_problem();
    const auto free = run(q);
    EXPECT_GT(r.final_field(20, 15, 0), free.final_field(20, 15, 0));
}

TEST(Pulse, SnapshotsRoundTrip) {
    PulseProblem p = small_problem();
    std::vector<std::pair<int, std::string>> snaps;
    SnapshotHook hook{2, [&](int step, const Field& f) {
                          std::ostringstream out;
                          write_field_snapshot(out, f);
                          snaps.emplace_back(step, out.str());
                      }};
    const auto r = run(p, TileTopology::decompose(p.grid, 2, 1), hook);
    ASSERT_EQ(snaps.size(), 1u);
    EXPECT_EQ(snaps[0].first, 2);
    const std::string& bytes = snaps[0].second;
    ASSERT_EQ(bytes.size(), 24u + 8u * p.grid.unknowns());
    EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 40u);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 30u);
    EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 2u);

    std::ostringstream out;
    write_field_snapshot(out, r.final_field);
    std::istringstream in(out.str());
    EXPECT_EQ(read_field_snapshot(in).flatten(), r.final_field.flatten());
    std::istringstream truncated(out.str().substr(0, 100));
    EXPECT_THROW((void)read_field_snapshot(truncated), std::runtime_error);
}
