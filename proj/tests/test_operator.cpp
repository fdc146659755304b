#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fld/comm.hpp"
#include "fld/operator.hpp"
#include "fld/oracle.hpp"
#include "fld/verify.hpp"

using namespace fld;

namespace {

OperatorSpec uniform_op(const GridSpec& g, double d, double dt, std::vector<double> c,
                        BoundaryCondition bc = BoundaryCondition::zero_flux()) {
    const TileBox box{{0, g.nx1}, {0, g.nx2}};
    return build_diffusion_operator(g, FaceCoefficients::uniform(g, box, g.nspecies, d), dt,
                                    uniform_coupling(g, box, c), bc);
}

double rel_max(const std::vector<double>& a, const std::vector<double>& ref) {
    double s = 0.0;
    for (double v : ref) s = std::max(s, std::abs(v));
    return oracle::max_abs_diff(a, ref) / s;
}

}  // namespace

TEST(Operator, InteriorCoefficients) {
    const GridSpec g{5, 4, 1, 0.5, 2.0};
    const auto op = uniform_op(g, 1.5, 0.2, {0.0});
    const double w1 = 0.2 * 1.5 / 0.25;
    const double w2 = 0.2 * 1.5 / 4.0;
    EXPECT_DOUBLE_EQ(op.stencil.west(2, 2, 0), -w1);
    EXPECT_DOUBLE_EQ(op.stencil.north(2, 2, 0), -w2);
    EXPECT_DOUBLE_EQ(op.stencil.diag(2, 2, 0), 1.0 + 2 * w1 + 2 * w2);
    // Corner zone: the two missing neighbors fold into diag under zero flux.
    EXPECT_EQ(op.stencil.west(0, 0, 0), 0.0);
    EXPECT_EQ(op.stencil.south(0, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(op.stencil.diag(0, 0, 0), 1.0 + w1 + w2);
}

TEST(Operator, ZeroFluxPreservesConstantsAndColumnSums) {
    const GridSpec g{7, 6, 2, 1.0, 1.0};
    const double k = 0.3;
    const auto op = uniform_op(g, 0.8, 0.5, {k, -k, -k, k});
    Field x = Field::global(g, 2, 1.0);
    Field y = Field::global(g, 2);
    apply_operator(op, x, y);
    // Rows sum to 1 for diffusion; the exchange block rows sum to zero too.
    for (double v : y.flatten()) EXPECT_NEAR(v, 1.0, 1e-14);
    const auto m = assemble_banded(op);
    std::vector<double> colsum(m.n, 0.0);
    for (std::size_t i = 0; i < m.n; ++i)
        for (const auto& [j, v] : m.rows[i]) colsum[j] += v;
    for (double c : colsum) EXPECT_NEAR(c, 1.0, 1e-14);
}

TEST(Operator, DirichletMovesBoundaryToSource) {
    const GridSpec g{4, 3, 1, 1.0, 1.0};
    const auto op = uniform_op(g, 1.0, 1.0, {0.0}, BoundaryCondition::dirichlet(2.0));
    EXPECT_DOUBLE_EQ(op.boundary_source(0, 0, 0), 4.0);
    EXPECT_DOUBLE_EQ(op.boundary_source(1, 0, 0), 2.0);
    EXPECT_EQ(op.boundary_source(1, 1, 0), 0.0);
    EXPECT_DOUBLE_EQ(op.stencil.diag(0, 0, 0), 5.0);
    // The steady state with matching interior is the boundary value.
    Field x = Field::global(g, 1, 2.0);
    Field y = Field::global(g, 1);
    apply_operator(op, x, y);
    const auto yf = y.flatten();
    const auto bf = op.boundary_source.flatten();
    for (std::size_t i = 0; i < yf.size(); ++i) EXPECT_NEAR(yf[i], 2.0 + bf[i], 1e-14);
}

TEST(Operator, MatchesIndependentAssemblyOnRandomSystems) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = verify::random_case(rng);
        const auto dense = oracle::dense_diffusion(c.problem);
        const GridSpec& g = c.problem.grid;
        Field x = Field::global(g, g.nspecies);
        for (double& v : x.raw()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
        Field y = Field::global(g, g.nspecies);
        for (auto path : {kernels::KernelPath::ScalarReference, kernels::KernelPath::Vectorized}) {
            apply_operator(c.op, x, y, path);
            ASSERT_LE(rel_max(y.flatten(), dense.system.multiply(x.flatten())), 1e-12);
        }
        const auto m = assemble_banded(c.op);
        ASSERT_LE(rel_max(m.to_dense(), dense.system.matrix), 1e-15);
        ASSERT_LE(oracle::max_abs_diff(c.op.boundary_source.flatten(), dense.rhs_shift), 1e-14);
    }
}

TEST(Operator, FiveBlockBands) {
    const GridSpec g{8, 7, 2, 1.0, 1.0};
    const auto op = uniform_op(g, 1.0, 1.0, {0.2, -0.1, -0.2, 0.1});
    const auto m = assemble_banded(op);
    std::set<long> offsets;
    for (std::size_t i = 0; i < m.n; ++i)
        for (const auto& [j, v] : m.rows[i]) offsets.insert(static_cast<long>(j / 2) - static_cast<long>(i / 2));
    EXPECT_EQ(offsets, (std::set<long>{-8, -1, 0, 1, 8}));
}

TEST(Operator, AssemblyGuards) {
    const GridSpec big{100, 60, 2, 1.0, 1.0};
    EXPECT_THROW((void)assemble_banded(uniform_op(big, 1.0, 1.0, {0, 0, 0, 0})), std::length_error);
    const GridSpec g{6, 4, 1, 1.0, 1.0};
    const auto topo = TileTopology::decompose(g, 2, 1);
    auto part = StencilCoefficients::zeros(g, topo.box(1), 1, 1);
    EXPECT_THROW((void)assemble_banded(part, g), std::invalid_argument);
}

TEST(Operator, RejectsBadInputs) {
    const GridSpec g{4, 4, 1, 1.0, 1.0};
    const TileBox box{{0, 4}, {0, 4}};
    const auto c = uniform_coupling(g, box, std::vector<double>{0.0});
    auto faces = FaceCoefficients::uniform(g, box, 1, 1.0);
    EXPECT_THROW((void)build_diffusion_operator(g, faces, 0.0, c, {}), std::invalid_argument);
    faces.east(1, 1, 0) = -1.0;
    EXPECT_THROW((void)build_diffusion_operator(g, faces, 1.0, c, {}), std::invalid_argument);
    faces.east(1, 1, 0) = std::nan("");
    EXPECT_THROW((void)build_diffusion_operator(g, faces, 1.0, c, {}), std::invalid_argument);
    EXPECT_THROW((void)uniform_coupling(g, box, std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST(Operator, TiledApplyEqualsGlobal) {
    std::mt19937_64 rng(5);
    const GridSpec g{12, 9, 2, 1.0, 1.0};
    const auto global = uniform_op(g, 0.7, 0.9, {0.4, -0.3, -0.4, 0.3});
    Field x = Field::global(g, 2);
    for (double& v : x.raw()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    Field yg = Field::global(g, 2);
    apply_operator(global, x, yg);
    const auto topo = TileTopology::decompose(g, 3, 2);
    std::vector<Field> ys(6);
    run_workers(topo, [&](Communicator& comm) {
        const TileBox b = comm.box();
        const auto op = build_diffusion_operator(g, FaceCoefficients::uniform(g, b, 2, 0.7, comm.rank()), 0.9,
                                                 uniform_coupling(g, b, std::vector<double>{0.4, -0.3, -0.4, 0.3},
                                                                  comm.rank()),
                                                 {});
        Field xt = scatter(topo, x, comm.rank());
        comm.halo_exchange(xt, BoundaryCondition::dirichlet(0.0));
        Field yt(g, b, 2, comm.rank());
        apply_operator(op, xt, yt);
        ys[static_cast<std::size_t>(comm.rank())] = yt;
    });
    EXPECT_EQ(gather(topo, ys).flatten(), yg.flatten());
}

TEST(Limiter, LambdaValues) {
    EXPECT_DOUBLE_EQ(limiter_lambda(Limiter::None, 5.0), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(limiter_lambda(Limiter::LevermorePomraning, 0.0), 1.0 / 3.0);
    // Free-streaming limit: lambda R -> 1.
    EXPECT_NEAR(1e6 * limiter_lambda(Limiter::LevermorePomraning, 1e6), 1.0, 1e-5);
    EXPECT_EQ(parse_limiter("lp"), Limiter::LevermorePomraning);
    EXPECT_EQ(parse_limiter(to_string(Limiter::None)), Limiter::None);
    EXPECT_THROW((void)parse_limiter("minerbo"), std::invalid_argument);
}

TEST(Limiter, FaceCoefficients) {
    const GridSpec g{6, 5, 1, 1.0, 1.0};
    Field e = Field::global(g, 1, 2.0);
    e.fill(2.0);
    const std::vector<double> kappa{0.5};
    auto none = flux_limited_D(e, g, kappa, 1.0, Limiter::None);
    EXPECT_DOUBLE_EQ(none.east(2, 2, 0), 1.0 / 1.5);
    // Uniform energy: R = 0 and the limited coefficient equals the diffusive one.
    auto lp = flux_limited_D(e, g, kappa, 1.0, Limiter::LevermorePomraning);
    EXPECT_DOUBLE_EQ(lp.north(2, 2, 0), 1.0 / 1.5);
    // A steep gradient pushes D below c / (3 kappa).
    e(3, 2, 0) = 200.0;
    lp = flux_limited_D(e, g, kappa, 1.0, Limiter::LevermorePomraning);
    EXPECT_LT(lp.east(2, 2, 0), 1.0 / 1.5);
    EXPECT_GT(lp.east(2, 2, 0), 0.0);
    e(3, 2, 0) = -1.0;
    e(4, 2, 0) = -1.0;
    EXPECT_THROW((void)flux_limited_D(e, g, kappa, 1.0, Limiter::LevermorePomraning), std::invalid_argument);
    EXPECT_THROW((void)flux_limited_D(e, g, std::vector<double>{0.0}, 1.0, Limiter::None), std::invalid_argument);
}
