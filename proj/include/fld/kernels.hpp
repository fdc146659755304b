#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace fld::kernels {

/// Which build of a kernel to run. Both paths satisfy the same contract:
/// elementwise kernels agree bit for bit, reductions agree to reassociation
/// round-off.
enum class KernelPath { ScalarReference, Vectorized };

[[nodiscard]] std::string_view to_string(KernelPath path) noexcept;
[[nodiscard]] KernelPath parse_kernel_path(std::string_view text);

/// Relative bound on |scalar - vectorized| for dot products, scaled by sum |x_i y_i|.
inline constexpr double kDotReassociationTolerance = 1e-13;

/// Number of doubles processed per SIMD step on the vectorized path.
[[nodiscard]] std::size_t simd_width() noexcept;

/// sum x_i y_i
[[nodiscard]] double dprod(KernelPath path, std::span<const double> x, std::span<const double> y);

/// out = a x + y
void daxpy(KernelPath path, double a, std::span<const double> x, std::span<const double> y,
           std::span<double> out);

/// out = c - d y
void dscal(KernelPath path, std::span<const double> c, double d, std::span<const double> y,
           std::span<double> out);

/// out = a x + b y + z
void ddaxpy(KernelPath path, double a, std::span<const double> x, double b,
            std::span<const double> y, std::span<const double> z, std::span<double> out);

struct DotPair {
    std::span<const double> x;
    std::span<const double> y;
};

/// dprod over each pair; results are ready to travel in one reduction event.
[[nodiscard]] std::vector<double> ganged_dprod(KernelPath path, std::span<const DotPair> pairs);

/// One interior row of the five-point stencil. Pointers address the first
/// interior entry of the row; neighbor values are read at offsets
/// +-comp_stride (x1) and +-row_stride (x2) from x.
struct StencilRow {
    const double* diag = nullptr;
    const double* west = nullptr;
    const double* east = nullptr;
    const double* south = nullptr;
    const double* north = nullptr;
    const double* x = nullptr;
    double* y = nullptr;
    std::size_t count = 0;
    std::ptrdiff_t comp_stride = 1;
    std::ptrdiff_t row_stride = 0;
};

/// y = diag x + west x[-1] + east x[+1] + south x[-row] + north x[+row],
/// summed left to right on both paths.
void stencil_row(KernelPath path, const StencilRow& row);

namespace scalar {
double dprod(const double* x, const double* y, std::size_t n);
void daxpy(double a, const double* x, const double* y, double* out, std::size_t n);
void dscal(const double* c, double d, const double* y, double* out, std::size_t n);
void ddaxpy(double a, const double* x, double b, const double* y, const double* z, double* out,
            std::size_t n);
void stencil_row(const StencilRow& row);
}  // namespace scalar

namespace simd {
std::size_t width() noexcept;
double dprod(const double* x, const double* y, std::size_t n);
void daxpy(double a, const double* x, const double* y, double* out, std::size_t n);
void dscal(const double* c, double d, const double* y, double* out, std::size_t n);
void ddaxpy(double a, const double* x, double b, const double* y, const double* z, double* out,
            std::size_t n);
void stencil_row(const StencilRow& row);
}  // namespace simd

}  // namespace fld::kernels
