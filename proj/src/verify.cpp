#include "fld/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

#include "fld/pulse.hpp"
#include "fld/solver.hpp"

namespace fld::verify {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::size_t unknown_index(const GridSpec& g, int i1, int i2, int s) {
    return (static_cast<std::size_t>(i2) * g.nx1 + static_cast<std::size_t>(i1)) * g.nspecies + s;
}

double rel_max(std::span<const double> x, std::span<const double> ref) {
    double scale = 0.0;
    for (double v : ref) scale = std::max(scale, std::abs(v));
    return oracle::max_abs_diff(x, ref) / (scale > 0.0 ? scale : 1.0);
}

Field random_field(std::mt19937_64& rng, const GridSpec& g) {
    Field f = Field::global(g, g.nspecies);
    for (double& v : f.raw()) v = uniform(rng, -1.0, 1.0);
    return f;
}

}  // namespace

FaceCoefficients faces_from(const oracle::DiffusionProblem& p) {
    const GridSpec& g = p.grid;
    const TileBox box{{0, g.nx1}, {0, g.nx2}};
    auto faces = FaceCoefficients::uniform(g, box, g.nspecies, 0.0);
    for (int i2 = -1; i2 < g.nx2; ++i2) {
        for (int i1 = -1; i1 < g.nx1; ++i1) {
            for (int s = 0; s < g.nspecies; ++s) {
                if (i2 >= 0) faces.east(i1, i2, s) = p.east(i1, i2, s);
                if (i1 >= 0) faces.north(i1, i2, s) = p.north(i1, i2, s);
            }
        }
    }
    return faces;
}

RandomCase random_case(std::mt19937_64& rng, const RandomCaseLimits& limits) {
    GridSpec g;
    g.nx1 = uniform_int(rng, 1, limits.max_nx1);
    g.nx2 = uniform_int(rng, 1, limits.max_nx2);
    g.nspecies = uniform_int(rng, 1, limits.max_nspecies);
    g.dx1 = uniform(rng, 0.5, 2.0);
    g.dx2 = uniform(rng, 0.5, 2.0);
    const int ns = g.nspecies;

    // Column sums of C vanish: C_ss = sum of the rates leaving species s.
    std::vector<double> c(static_cast<std::size_t>(ns * ns), 0.0);
    for (int s = 0; s < ns; ++s) {
        for (int t = 0; t < ns; ++t) {
            if (s == t) continue;
            const double rate = uniform(rng, 0.0, 1.0);
            c[static_cast<std::size_t>(t * ns + s)] = -rate;
            c[static_cast<std::size_t>(s * ns + s)] += rate;
        }
    }
    BoundaryCondition bc = BoundaryCondition::zero_flux();
    if (limits.allow_dirichlet && uniform(rng, 0.0, 1.0) < 0.5) bc = BoundaryCondition::dirichlet(uniform(rng, 0.0, 2.0));

    auto p = oracle::DiffusionProblem::uniform(g, uniform(rng, 0.05, 2.0), 0.0, c, bc);
    for (double& d : p.d_east) d = uniform(rng, 0.1, 2.0);
    for (double& d : p.d_north) d = uniform(rng, 0.1, 2.0);

    const TileBox box{{0, g.nx1}, {0, g.nx2}};
    OperatorSpec op = build_diffusion_operator(g, faces_from(p), p.dt, uniform_coupling(g, box, c), bc);
    return {std::move(p), std::move(op)};
}

oracle::DenseSystem dense_operator(const RandomCase& c) { return oracle::dense_diffusion(c.problem).system; }

double column_residual(const oracle::DenseSystem& a, const AssembledMatrix& m, std::size_t column) {
    std::vector<double> mj(a.n, 0.0);
    for (std::size_t i = 0; i < m.n; ++i) mj[i] = m.at(i, column);
    auto r = a.multiply(mj);
    r[column] -= 1.0;
    return oracle::norm2(r);
}

double spai_column_oracle_residual(const oracle::DenseSystem& a, const GridSpec& g, std::size_t column) {
    const int ns = g.nspecies;
    const int s = static_cast<int>(column % ns);
    const int zone = static_cast<int>(column / ns);
    const int i1 = zone % g.nx1;
    const int i2 = zone / g.nx1;
    std::vector<std::size_t> cols;
    for (int t = 0; t < ns; ++t) cols.push_back(unknown_index(g, i1, i2, t));
    const int nb[4][2] = {{i1 - 1, i2}, {i1 + 1, i2}, {i1, i2 - 1}, {i1, i2 + 1}};
    for (const auto& q : nb) {
        if (q[0] >= 0 && q[0] < g.nx1 && q[1] >= 0 && q[1] < g.nx2) cols.push_back(unknown_index(g, q[0], q[1], s));
    }
    std::vector<double> sub(a.n * cols.size());
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t k = 0; k < cols.size(); ++k) sub[i * cols.size() + k] = a.a(i, cols[k]);
    }
    std::vector<double> e(a.n, 0.0);
    e[column] = 1.0;
    return oracle::dense_lstsq(sub, a.n, cols.size(), e).residual;
}

double block_jacobi_column_residual(const oracle::DenseSystem& a, const GridSpec& g, std::size_t column) {
    const std::size_t ns = static_cast<std::size_t>(g.nspecies);
    const std::size_t base = column - column % ns;
    oracle::DenseSystem block(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < ns; ++j) block.a(i, j) = a.a(base + i, base + j);
    }
    block.rhs[column % ns] = 1.0;
    const auto b = oracle::dense_solve(block);
    std::vector<double> mj(a.n, 0.0);
    for (std::size_t i = 0; i < ns; ++i) mj[base + i] = b[i];
    auto r = a.multiply(mj);
    r[column] -= 1.0;
    return oracle::norm2(r);
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"operator_assembly", "bicgstab_direct", "spai_optimality",
                                                "variant_equivalence", "analytic_pulse"};
    return names;
}

namespace {

CheckResult check_operator(std::mt19937_64& rng, Fault fault) {
    CheckResult res{"operator_assembly", true, ""};
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        RandomCase c = random_case(rng);
        if (fault == Fault::PerturbStencil) c.op.stencil.diag(0, 0, 0) *= 1.0 + 1e-6;
        const auto dense = oracle::dense_diffusion(c.problem);
        const GridSpec& g = c.problem.grid;

        Field x = random_field(rng, g);
        Field y = Field::global(g, g.nspecies);
        apply_operator(c.op, x, y, kernels::KernelPath::Vectorized);
        const auto xf = x.flatten();
        worst = std::max(worst, rel_max(y.flatten(), dense.system.multiply(xf)));
        worst = std::max(worst, rel_max(c.op.boundary_source.flatten(), dense.rhs_shift));

        const AssembledMatrix m = assemble_banded(c.op);
        worst = std::max(worst, rel_max(m.to_dense(), dense.system.matrix));
        for (std::size_t i = 0; i < m.n; ++i) {
            for (const auto& [j, v] : m.rows[i]) {
                const auto zi = static_cast<long>(i / g.nspecies);
                const auto zj = static_cast<long>(j / g.nspecies);
                const long off = zj - zi;
                if (off != 0 && off != 1 && off != -1 && off != g.nx1 && off != -g.nx1) {
                    res.passed = false;
                    res.detail = fmt::format("entry ({}, {}) outside the five block bands", i, j);
                    return res;
                }
            }
        }
    }
    res.passed = worst <= 1e-12;
    res.detail = fmt::format("50 random systems, worst relative difference {:.2e} (limit 1e-12)", worst);
    return res;
}

CheckResult check_bicgstab(std::mt19937_64& rng) {
    CheckResult res{"bicgstab_direct", true, ""};
    double worst = 0.0;
    int runs = 0;
    for (int k = 0; k < 20; ++k) {
        const RandomCase c = random_case(rng);
        const GridSpec& g = c.problem.grid;
        const Field b = random_field(rng, g);
        oracle::DenseSystem sys = dense_operator(c);
        sys.rhs = b.flatten();
        const auto ref = oracle::dense_solve(sys);
        for (auto variant : {BicgstabVariant::Classic, BicgstabVariant::Ganged}) {
            for (auto kind : {PreconditionerKind::Identity, PreconditionerKind::BlockJacobi, PreconditionerKind::Spai}) {
                SolverConfig cfg;
                cfg.tol = 1e-10;
                cfg.variant = variant;
                cfg.precond = kind;
                Communicator comm(TileTopology::decompose(g, 1, 1));
                const auto m = build_preconditioner(comm, kind, c.op);
                Field x = Field::global(g, g.nspecies);
                const auto stats = bicgstab(comm, c.op, m, b, x, cfg);
                ++runs;
                const auto xf = x.flatten();
                auto r = sys.multiply(xf);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] -= sys.rhs[i];
                const double true_res = oracle::norm2(r) / oracle::norm2(sys.rhs);
                std::vector<double> diff(xf.size());
                for (std::size_t i = 0; i < xf.size(); ++i) diff[i] = xf[i] - ref[i];
                const double err = oracle::norm2(diff) / oracle::norm2(ref);
                worst = std::max(worst, err);
                if (!stats.converged() || err > 1e-6 || stats.final_relative_residual > cfg.tol ||
                    true_res > 1.01 * cfg.tol) {
                    res.passed = false;
                    res.detail = fmt::format("{} / {}: {} error {:.2e} residual {:.2e}", to_string(variant),
                                             to_string(kind), to_string(stats.outcome, stats.breakdown), err,
                                             true_res);
                    return res;
                }
            }
        }
    }
    res.detail = fmt::format("{} solves, worst relative error {:.2e} (limit 1e-6)", runs, worst);
    return res;
}

CheckResult check_spai(std::mt19937_64& rng) {
    CheckResult res{"spai_optimality", true, ""};
    std::size_t columns = 0;
    double worst_gap = 0.0;
    for (int k = 0; k < 20; ++k) {
        const RandomCase c = random_case(rng);
        const GridSpec& g = c.problem.grid;
        const auto a = dense_operator(c);
        const auto m = build_spai(c.op);
        const auto mm = assemble_banded(*m.spai, g);
        const auto stored = m.spai_residual.flatten();
        for (std::size_t j = 0; j < a.n; ++j) {
            const double actual = column_residual(a, mm, j);
            const double best = spai_column_oracle_residual(a, g, j);
            const double bj = block_jacobi_column_residual(a, g, j);
            ++columns;
            worst_gap = std::max(worst_gap, actual - best);
            if (actual > best + 1e-10 || actual > bj * (1.0 + 1e-12) + 1e-14 || std::abs(stored[j] - actual) > 1e-10) {
                res.passed = false;
                res.detail = fmt::format("column {}: residual {:.6e}, least squares {:.6e}, block Jacobi {:.6e}, stored {:.6e}",
                                         j, actual, best, bj, stored[j]);
                return res;
            }
        }
    }
    res.detail = fmt::format("{} columns, worst excess over least squares {:.2e}", columns, worst_gap);
    return res;
}

CheckResult check_variants(std::mt19937_64& rng) {
    CheckResult res{"variant_equivalence", true, ""};
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        RandomCaseLimits lim;
        lim.max_nx1 = 8;
        lim.max_nx2 = 7;
        RandomCase c = random_case(rng, lim);
        const GridSpec& g = c.problem.grid;
        const Field b = random_field(rng, g);
        const Field x0 = Field::global(g, g.nspecies);
        const auto m = build_block_jacobi(c.op);
        for (const auto& [xc, xg] : bicgstab_variant_equivalence_probe(c.op, m, b, x0, 10)) {
            worst = std::max(worst, rel_max(xg, xc));
        }
        for (auto variant : {BicgstabVariant::Classic, BicgstabVariant::Ganged}) {
            SolverConfig cfg;
            cfg.variant = variant;
            cfg.tol = 1e-300;
            cfg.max_iter = 3;
            Field x = x0;
            const auto st = bicgstab(c.op, m, b, x, cfg);
            if (st.outcome != SolveOutcome::MaxIter) continue;
            const auto per_iter = st.reduction_events - st.setup_reduction_events -
                                  static_cast<std::uint64_t>(st.true_residual_checks);
            if (per_iter != static_cast<std::uint64_t>(reductions_per_iteration(variant) * st.iterations)) {
                res.passed = false;
                res.detail = fmt::format("{}: {} reduction events over {} iterations", to_string(variant),
                                         per_iter, st.iterations);
                return res;
            }
        }
    }
    res.passed = worst <= 1e-10;
    res.detail = fmt::format("worst per-iterate relative difference {:.2e} (limit 1e-10); 4 vs 2 events per iteration",
                             worst);
    return res;
}

CheckResult check_pulse() {
    CheckResult res{"analytic_pulse", true, ""};
    PulseProblem p;
    p.grid = {64, 64, 2, 1.0, 1.0};
    p.center = {32.0, 32.0};
    p.sigma0 = 4.0;
    p.dt = 0.1;
    p.nsteps = 10;
    p.solver.tol = 1e-12;
    const RunReport rep = run(p);
    const double err = relative_l2_error(rep.final_field, analytic_solution(p, p.final_time()));
    const double drift = std::abs(rep.energy_final - rep.energy_initial) / rep.energy_initial;
    res.passed = rep.completed && err <= 1e-2 && drift <= 1e-9;
    res.detail = fmt::format("64x64x2, t = {}: L2 error {:.3e} (limit 1e-2), energy drift {:.2e} (limit 1e-9)",
                             p.final_time(), err, drift);
    return res;
}

}  // namespace

std::vector<CheckResult> run_checks(const VerifyOptions& options) {
    const auto& all = check_names();
    std::vector<std::string> selected = options.checks.value_or(all);
    for (const auto& name : selected) {
        if (std::find(all.begin(), all.end(), name) == all.end()) {
            throw std::invalid_argument(fmt::format("unknown check '{}'", name));
        }
    }
    std::vector<CheckResult> out;
    for (const auto& name : all) {
        if (std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
        std::mt19937_64 rng(options.seed);
        if (name == "operator_assembly") out.push_back(check_operator(rng, options.fault));
        if (name == "bicgstab_direct") out.push_back(check_bicgstab(rng));
        if (name == "spai_optimality") out.push_back(check_spai(rng));
        if (name == "variant_equivalence") out.push_back(check_variants(rng));
        if (name == "analytic_pulse") out.push_back(check_pulse());
    }
    return out;
}

}  // namespace fld::verify
