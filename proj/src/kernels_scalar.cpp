// Reference path. Built with auto-vectorization disabled (see CMakeLists.txt).
#include "fld/kernels.hpp"

namespace fld::kernels::scalar {

double dprod(const double* x, const double* y, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

void daxpy(double a, const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + y[i];
}

void dscal(const double* c, double d, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = c[i] - d * y[i];
}

void ddaxpy(double a, const double* x, double b, const double* y, const double* z, double* out,
            std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i] + z[i];
}

void stencil_row(const StencilRow& r) {
    const double* x = r.x;
    const std::ptrdiff_t cs = r.comp_stride;
    const std::ptrdiff_t rs = r.row_stride;
    for (std::size_t i = 0; i < r.count; ++i) {
        const auto k = static_cast<std::ptrdiff_t>(i);
        r.y[i] = r.diag[i] * x[k] + r.west[i] * x[k - cs] + r.east[i] * x[k + cs] +
                 r.south[i] * x[k - rs] + r.north[i] * x[k + rs];
    }
}

}  // namespace fld::kernels::scalar
