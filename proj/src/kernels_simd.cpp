#include <experimental/simd>

#include "fld/kernels.hpp"

namespace fld::kernels::simd {

namespace stdx = std::experimental;
using Vec = stdx::native_simd<double>;
constexpr std::size_t W = Vec::size();

namespace {

inline Vec load(const double* p) { return Vec(p, stdx::element_aligned); }
inline void store(const Vec& v, double* p) { v.copy_to(p, stdx::element_aligned); }

}  // namespace

std::size_t width() noexcept { return W; }

double dprod(const double* x, const double* y, std::size_t n) {
    // Two independent accumulators hide the add latency; lanes are combined in
    // a fixed order so the result does not depend on scheduling.
    Vec acc0(0.0);
    Vec acc1(0.0);
    std::size_t i = 0;
    for (; i + 2 * W <= n; i += 2 * W) {
        acc0 += load(x + i) * load(y + i);
        acc1 += load(x + i + W) * load(y + i + W);
    }
    if (i + W <= n) {
        acc0 += load(x + i) * load(y + i);
        i += W;
    }
    const Vec acc = acc0 + acc1;
    double sum = 0.0;
    for (std::size_t lane = 0; lane < W; ++lane) sum += acc[lane];
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

void daxpy(double a, const double* x, const double* y, double* out, std::size_t n) {
    const Vec va(a);
    std::size_t i = 0;
    for (; i + W <= n; i += W) store(va * load(x + i) + load(y + i), out + i);
    for (; i < n; ++i) out[i] = a * x[i] + y[i];
}

void dscal(const double* c, double d, const double* y, double* out, std::size_t n) {
    const Vec vd(d);
    std::size_t i = 0;
    for (; i + W <= n; i += W) store(load(c + i) - vd * load(y + i), out + i);
    for (; i < n; ++i) out[i] = c[i] - d * y[i];
}

void ddaxpy(double a, const double* x, double b, const double* y, const double* z, double* out,
            std::size_t n) {
    const Vec va(a);
    const Vec vb(b);
    std::size_t i = 0;
    for (; i + W <= n; i += W) store(va * load(x + i) + vb * load(y + i) + load(z + i), out + i);
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i] + z[i];
}

void stencil_row(const StencilRow& r) {
    const double* x = r.x;
    const std::ptrdiff_t cs = r.comp_stride;
    const std::ptrdiff_t rs = r.row_stride;
    std::size_t i = 0;
    for (; i + W <= r.count; i += W) {
        const auto k = static_cast<std::ptrdiff_t>(i);
        const Vec y = load(r.diag + i) * load(x + k) + load(r.west + i) * load(x + k - cs) +
                      load(r.east + i) * load(x + k + cs) + load(r.south + i) * load(x + k - rs) +
                      load(r.north + i) * load(x + k + rs);
        store(y, r.y + i);
    }
    for (; i < r.count; ++i) {
        const auto k = static_cast<std::ptrdiff_t>(i);
        r.y[i] = r.diag[i] * x[k] + r.west[i] * x[k - cs] + r.east[i] * x[k + cs] +
                 r.south[i] * x[k - rs] + r.north[i] * x[k + rs];
    }
}

}  // namespace fld::kernels::simd
