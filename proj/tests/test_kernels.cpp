#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fld/field_ops.hpp"
#include "fld/kernels.hpp"

using namespace fld;
using namespace fld::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

constexpr std::size_t kLengths[] = {1, 2, 7, 64, 1000, 1001};

}  // namespace

TEST(Kernels, PathNames) {
    EXPECT_EQ(parse_kernel_path("scalar"), KernelPath::ScalarReference);
    EXPECT_EQ(parse_kernel_path(to_string(KernelPath::Vectorized)), KernelPath::Vectorized);
    EXPECT_THROW((void)parse_kernel_path("sve"), std::invalid_argument);
    EXPECT_GE(simd_width(), 1u);
}

TEST(Kernels, SmallHandValues) {
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> y{4, 5, 6};
    const std::vector<double> z{1, 1, 1};
    std::vector<double> out(3);
    for (auto p : {KernelPath::ScalarReference, KernelPath::Vectorized}) {
        EXPECT_EQ(dprod(p, x, y), 32.0);
        daxpy(p, 2.0, x, y, out);
        EXPECT_EQ(out, (std::vector<double>{6, 9, 12}));
        dscal(p, y, 2.0, x, out);
        EXPECT_EQ(out, (std::vector<double>{2, 1, 0}));
        ddaxpy(p, 2.0, x, -1.0, y, z, out);
        EXPECT_EQ(out, (std::vector<double>{-1, 0, 1}));
    }
}

TEST(Kernels, EmptyInputs) {
    const std::vector<double> e;
    std::vector<double> out;
    for (auto p : {KernelPath::ScalarReference, KernelPath::Vectorized}) {
        EXPECT_EQ(dprod(p, e, e), 0.0);
        EXPECT_NO_THROW(daxpy(p, 1.0, e, e, out));
    }
}

TEST(Kernels, LengthMismatchIsLogicError) {
    const std::vector<double> a(4), b(5);
    std::vector<double> out(4);
    for (auto p : {KernelPath::ScalarReference, KernelPath::Vectorized}) {
        EXPECT_THROW((void)dprod(p, a, b), std::logic_error);
        EXPECT_THROW(daxpy(p, 1.0, a, b, out), std::logic_error);
        EXPECT_THROW(dscal(p, a, 1.0, b, out), std::logic_error);
        EXPECT_THROW(ddaxpy(p, 1.0, a, 1.0, a, b, out), std::logic_error);
    }
}

TEST(Kernels, PathEquivalenceOverRandomInputs) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = kLengths[trial % std::size(kLengths)];
        const auto x = random_vec(rng, n);
        const auto y = random_vec(rng, n);
        const auto z = random_vec(rng, n);
        const double a = coef(rng);
        const double b = coef(rng);
        std::vector<double> o1(n), o2(n);

        daxpy(KernelPath::ScalarReference, a, x, y, o1);
        daxpy(KernelPath::Vectorized, a, x, y, o2);
        ASSERT_EQ(o1, o2);
        dscal(KernelPath::ScalarReference, x, a, y, o1);
        dscal(KernelPath::Vectorized, x, a, y, o2);
        ASSERT_EQ(o1, o2);
        ddaxpy(KernelPath::ScalarReference, a, x, b, y, z, o1);
        ddaxpy(KernelPath::Vectorized, a, x, b, y, z, o2);
        ASSERT_EQ(o1, o2);

        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
        const double ds = dprod(KernelPath::ScalarReference, x, y);
        const double dv = dprod(KernelPath::Vectorized, x, y);
        ASSERT_LE(std::abs(ds - dv), kDotReassociationTolerance * scale) << "n = " << n;
    }
}

TEST(Kernels, ScalarDotIsSequentialSum) {
    std::mt19937_64 rng(2);
    for (std::size_t n : kLengths) {
        const auto x = random_vec(rng, n);
        const auto y = random_vec(rng, n);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
        EXPECT_EQ(dprod(KernelPath::ScalarReference, x, y), acc);
    }
}

TEST(Kernels, GangedEqualsIndividualDots) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = kLengths[trial % std::size(kLengths)];
        std::vector<std::vector<double>> v;
        for (int k = 0; k < 6; ++k) v.push_back(random_vec(rng, n));
        const std::vector<DotPair> pairs{{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[0], v[0]}};
        for (auto p : {KernelPath::ScalarReference, KernelPath::Vectorized}) {
            const auto g = ganged_dprod(p, pairs);
            ASSERT_EQ(g.size(), pairs.size());
            for (std::size_t k = 0; k < pairs.size(); ++k) ASSERT_EQ(g[k], dprod(p, pairs[k].x, pairs[k].y));
        }
    }
}

TEST(Kernels, StencilRowPathsAgreeExactly) {
    std::mt19937_64 rng(4);
    for (std::size_t n : kLengths) {
        const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(n) + 2;
        const auto x = random_vec(rng, static_cast<std::size_t>(3 * row));
        std::vector<std::vector<double>> c;
        for (int k = 0; k < 5; ++k) c.push_back(random_vec(rng, n));
        std::vector<double> y1(n), y2(n);
        StencilRow r{c[0].data(), c[1].data(), c[2].data(), c[3].data(), c[4].data(),
                     x.data() + row + 1, y1.data(), n, 1, row};
        stencil_row(KernelPath::ScalarReference, r);
        r.y = y2.data();
        stencil_row(KernelPath::Vectorized, r);
        EXPECT_EQ(y1, y2);
        const double* xc = x.data() + row + 1;
        for (std::size_t i = 0; i < n; ++i) {
            const double expect = c[0][i] * xc[i] + c[1][i] * xc[i - 1] + c[2][i] * xc[i + 1] +
                                  c[3][i] * xc[static_cast<std::ptrdiff_t>(i) - row] +
                                  c[4][i] * xc[static_cast<std::ptrdiff_t>(i) + row];
            EXPECT_EQ(y1[i], expect);
        }
    }
}

TEST(FieldOps, ElementwiseAllowsAliasing) {
    const GridSpec g{5, 3, 2, 1, 1};
    Field x = Field::global(g, 2, 1.0);
    Field y = Field::global(g, 2, 2.0);
    field_ops::daxpy(KernelPath::Vectorized, 3.0, x, y, y);
    for (double v : y.flatten()) EXPECT_EQ(v, 5.0);
    field_ops::dscal(KernelPath::ScalarReference, y, 2.0, x, y);
    for (double v : y.flatten()) EXPECT_EQ(v, 3.0);
    EXPECT_EQ(field_ops::local_sum(y), 90.0);
    EXPECT_EQ(field_ops::local_dot(KernelPath::Vectorized, x, y), 90.0);
}

TEST(FieldOps, GangedDotIsOneEvent) {
    const GridSpec g{6, 4, 2, 1, 1};
    Communicator comm(TileTopology::decompose(g, 1, 1));
    Field a = Field::global(g, 2, 2.0);
    Field b = Field::global(g, 2, 0.5);
    const auto r = field_ops::ganged_dot(comm, KernelPath::Vectorized, {{&a, &b}, {&a, &a}, {&b, &b}});
    EXPECT_EQ(comm.reduction_events(), 1u);
    EXPECT_EQ(r, (std::vector<double>{48.0, 192.0, 12.0}));
}
