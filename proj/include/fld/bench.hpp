#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fld/kernels.hpp"
#include "fld/pulse.hpp"

namespace fld::bench {

/// Spai applies the pulse preconditioner; it is opt-in and not in the default set.
enum class BenchKernel { Matvec, Dprod, Daxpy, Dscal, Ddaxpy, Spai };

inline constexpr std::array<BenchKernel, 5> kDefaultKernels{
    BenchKernel::Matvec, BenchKernel::Dprod, BenchKernel::Daxpy, BenchKernel::Dscal, BenchKernel::Ddaxpy};

[[nodiscard]] std::string_view to_string(BenchKernel k) noexcept;
/// Case-insensitive: "MATVEC", "dprod", ...
[[nodiscard]] BenchKernel parse_kernel(std::string_view text);

struct BenchConfig {
    int n = 1000;
    long reps = 100'000;
    long warmup_reps = 1000;
    std::uint64_t rng_seed = 20240611;
    std::vector<BenchKernel> kernels{kDefaultKernels.begin(), kDefaultKernels.end()};
    std::vector<kernels::KernelPath> paths{kernels::KernelPath::ScalarReference,
                                           kernels::KernelPath::Vectorized};

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct KernelTiming {
    BenchKernel kernel = BenchKernel::Dprod;
    kernels::KernelPath path = kernels::KernelPath::ScalarReference;
    long reps = 0;
    double total_s = 0.0;
    double per_call_ns = 0.0;
    /// Sum over reps of one output value per call (the dot product itself for
    /// DPROD); keeps every call observable.
    double checksum = 0.0;
    /// Sum of |contribution|, the scale for comparing checksums across paths.
    double checksum_magnitude = 0.0;
};

struct BenchReport {
    BenchConfig config;
    std::vector<KernelTiming> rows;
    double timer_resolution_ns = 0.0;
    std::size_t simd_width = 1;

    [[nodiscard]] const KernelTiming* find(BenchKernel k, kernels::KernelPath p) const;
    /// Vectorized / ScalarReference wall time, when both paths ran.
    [[nodiscard]] std::optional<double> ratio(BenchKernel k) const;
    /// Both paths' checksums agree within the kernel tolerance, for every kernel
    /// that ran on both paths.
    [[nodiscard]] bool checksums_agree() const;
};

[[nodiscard]] bool checksums_agree(const KernelTiming& a, const KernelTiming& b);

/// Single-worker timing of each (kernel, path); MATVEC runs the production
/// stencil on an n x 1 x 1 grid.
[[nodiscard]] BenchReport run_kernel_bench(const BenchConfig& cfg);

/// Smallest observable step of the monotonic clock, in nanoseconds.
[[nodiscard]] double measure_timer_resolution_ns();

struct SweepRow {
    int nprx1 = 0;
    int nprx2 = 0;
    int np = 0;
    int runs = 0;
    double time_s_median = 0.0;
    double time_s_min = 0.0;
    std::uint64_t iters_total = 0;
    std::uint64_t reductions_total = 0;
    std::uint64_t matvecs_total = 0;
    std::size_t solves = 0;
    bool all_converged = false;
    /// Every repeat produced the same iteration and reduction totals.
    bool counts_stable = true;
    bool skipped = false;
    std::string reason;
};

/// One row per topology; each is run `runs` times. Invalid topologies and
/// ones above the worker cap are reported as skipped rows.
[[nodiscard]] std::vector<SweepRow> run_scaling_sweep(const PulseProblem& problem,
                                                      const std::vector<std::array<int, 2>>& topologies,
                                                      int runs = 3);

[[nodiscard]] double median(std::vector<double> values);

void write_kernel_csv(std::ostream& out, const BenchReport& report);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
[[nodiscard]] std::string render_kernel_table(const BenchReport& report);
[[nodiscard]] std::string render_sweep_table(const std::vector<SweepRow>& rows);

}  // namespace fld::bench
