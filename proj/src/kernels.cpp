#include "fld/kernels.hpp"

#include <stdexcept>
#include <string>

#include <fmt/core.h>

namespace fld::kernels {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::logic_error(fmt::format("{}: length mismatch ({} vs {})", what, a, b));
}

}  // namespace

std::string_view to_string(KernelPath path) noexcept {
    return path == KernelPath::ScalarReference ? "scalar" : "vectorized";
}

KernelPath parse_kernel_path(std::string_view text) {
    if (text == "scalar") return KernelPath::ScalarReference;
    if (text == "vectorized") return KernelPath::Vectorized;
    throw std::invalid_argument(fmt::format("unknown kernel path '{}'", text));
}

std::size_t simd_width() noexcept { return simd::width(); }

double dprod(KernelPath path, std::span<const double> x, std::span<const double> y) {
    require_same_length(x.size(), y.size(), "dprod");
    return path == KernelPath::Vectorized ? simd::dprod(x.data(), y.data(), x.size())
                                          : scalar::dprod(x.data(), y.data(), x.size());
}

void daxpy(KernelPath path, double a, std::span<const double> x, std::span<const double> y,
           std::span<double> out) {
    require_same_length(x.size(), y.size(), "daxpy");
    require_same_length(x.size(), out.size(), "daxpy");
    if (path == KernelPath::Vectorized)
        simd::daxpy(a, x.data(), y.data(), out.data(), x.size());
    else
        scalar::daxpy(a, x.data(), y.data(), out.data(), x.size());
}

void dscal(KernelPath path, std::span<const double> c, double d, std::span<const double> y,
           std::span<double> out) {
    require_same_length(c.size(), y.size(), "dscal");
    require_same_length(c.size(), out.size(), "dscal");
    if (path == KernelPath::Vectorized)
        simd::dscal(c.data(), d, y.data(), out.data(), c.size());
    else
        scalar::dscal(c.data(), d, y.data(), out.data(), c.size());
}

void ddaxpy(KernelPath path, double a, std::span<const double> x, double b,
            std::span<const double> y, std::span<const double> z, std::span<double> out) {
    require_same_length(x.size(), y.size(), "ddaxpy");
    require_same_length(x.size(), z.size(), "ddaxpy");
    require_same_length(x.size(), out.size(), "ddaxpy");
    if (path == KernelPath::Vectorized)
        simd::ddaxpy(a, x.data(), b, y.data(), z.data(), out.data(), x.size());
    else
        scalar::ddaxpy(a, x.data(), b, y.data(), z.data(), out.data(), x.size());
}

std::vector<double> ganged_dprod(KernelPath path, std::span<const DotPair> pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(dprod(path, p.x, p.y));
    return out;
}

void stencil_row(KernelPath path, const StencilRow& row) {
    if (path == KernelPath::Vectorized)
        simd::stencil_row(row);
    else
        scalar::stencil_row(row);
}

}  // namespace fld::kernels
