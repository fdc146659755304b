#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fld/precond.hpp"
#include "fld/verify.hpp"

using namespace fld;

namespace {

OperatorSpec uniform_op(const GridSpec& g, double d, double dt, std::vector<double> c) {
    const TileBox box{{0, g.nx1}, {0, g.nx2}};
    return build_diffusion_operator(g, FaceCoefficients::uniform(g, box, g.nspecies, d), dt,
                                    uniform_coupling(g, box, c), BoundaryCondition::zero_flux());
}

}  // namespace

TEST(Precond, Names) {
    EXPECT_EQ(parse_preconditioner("none"), PreconditionerKind::Identity);
    EXPECT_EQ(parse_preconditioner("block_jacobi"), PreconditionerKind::BlockJacobi);
    EXPECT_EQ(parse_preconditioner(to_string(PreconditionerKind::Spai)), PreconditionerKind::Spai);
    EXPECT_THROW((void)parse_preconditioner("ilu"), std::invalid_argument);
}

TEST(Precond, IdentityCopies) {
    const GridSpec g{3, 3, 2, 1, 1};
    Field v = Field::global(g, 2, 1.25);
    Field out = Field::global(g, 2);
    apply_precond(identity_preconditioner(), v, out);
    EXPECT_EQ(out.flatten(), v.flatten());
}

TEST(Precond, BlockJacobiInvertsDiagonalBlocks) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = verify::random_case(rng);
        const GridSpec& g = c.problem.grid;
        const auto m = build_block_jacobi(c.op);
        const auto a = verify::dense_operator(c);
        const int ns = g.nspecies;
        for (std::size_t z = 0; z < g.zones(); ++z) {
            // (block) * (block inverse) = I
            const int i1 = static_cast<int>(z % g.nx1);
            const int i2 = static_cast<int>(z / g.nx1);
            for (int r = 0; r < ns; ++r) {
                for (int col = 0; col < ns; ++col) {
                    double acc = 0.0;
                    for (int k = 0; k < ns; ++k)
                        acc += a.a(z * ns + r, z * ns + k) * m.block_inverse(i1, i2, k * ns + col);
                    EXPECT_NEAR(acc, r == col ? 1.0 : 0.0, 1e-13);
                }
            }
        }
    }
}

TEST(Precond, BlockJacobiReportsSingularZone) {
    const GridSpec g{3, 2, 1, 1, 1};
    auto op = uniform_op(g, 1.0, 1.0, {0.0});
    op.stencil.diag(2, 1, 0) = 0.0;
    try {
        (void)build_block_jacobi(op);
        FAIL();
    } catch (const SingularBlockError& e) {
        EXPECT_EQ(e.zone(), (std::array<int, 2>{2, 1}));
    }
}

TEST(Precond, SpaiColumnsAreLeastSquaresOptimal) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = verify::random_case(rng);
        const GridSpec& g = c.problem.grid;
        const auto a = verify::dense_operator(c);
        const auto m = build_spai(c.op);
        ASSERT_TRUE(m.spai.has_value());
        EXPECT_EQ(m.spai_fallbacks, 0u);
        const auto mm = assemble_banded(*m.spai, g);
        const auto stored = m.spai_residual.flatten();
        for (std::size_t j = 0; j < a.n; ++j) {
            const double actual = verify::column_residual(a, mm, j);
            ASSERT_NEAR(actual, verify::spai_column_oracle_residual(a, g, j), 1e-10);
            ASSERT_NEAR(stored[j], actual, 1e-10);
            ASSERT_LE(actual, verify::block_jacobi_column_residual(a, g, j) * (1 + 1e-12) + 1e-14);
        }
    }
}

TEST(Precond, SpaiApplyMatchesAssembledMatrix) {
    std::mt19937_64 rng(10);
    const auto c = verify::random_case(rng, {8, 7, 2, false});
    const GridSpec& g = c.problem.grid;
    const auto m = build_spai(c.op);
    Field v = Field::global(g, g.nspecies);
    for (double& x : v.raw()) x = std::uniform_real_distribution<double>(-1, 1)(rng);
    v.fill_boundary_halo(Side::West, BoundaryCondition::dirichlet(0.0));
    v.fill_boundary_halo(Side::East, BoundaryCondition::dirichlet(0.0));
    v.fill_boundary_halo(Side::South, BoundaryCondition::dirichlet(0.0));
    v.fill_boundary_halo(Side::North, BoundaryCondition::dirichlet(0.0));
    Field out = Field::global(g, g.nspecies);
    apply_precond(m, v, out);
    const auto expect = assemble_banded(*m.spai, g).multiply(v.flatten());
    EXPECT_LE(oracle::max_abs_diff(out.flatten(), expect), 1e-14);
}

TEST(Precond, TiledSpaiEqualsSerial) {
    const GridSpec g{10, 8, 2, 1.0, 1.0};
    const std::vector<double> c{0.5, -0.2, -0.5, 0.2};
    const auto serial = build_spai(uniform_op(g, 1.3, 0.7, c));
    const auto topo = TileTopology::decompose(g, 3, 2);
    std::vector<Field> diag(6), east(6), res(6);
    run_workers(topo, [&](Communicator& comm) {
        const TileBox b = comm.box();
        const auto op = build_diffusion_operator(g, FaceCoefficients::uniform(g, b, 2, 1.3, comm.rank()), 0.7,
                                                 uniform_coupling(g, b, c, comm.rank()), {});
        const auto m = build_spai(comm, op);
        const auto r = static_cast<std::size_t>(comm.rank());
        diag[r] = m.spai->diag;
        east[r] = m.spai->east;
        res[r] = m.spai_residual;
    });
    EXPECT_EQ(gather(topo, diag).flatten(), serial.spai->diag.flatten());
    EXPECT_EQ(gather(topo, east).flatten(), serial.spai->east.flatten());
    EXPECT_EQ(gather(topo, res).flatten(), serial.spai_residual.flatten());
}
