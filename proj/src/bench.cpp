#include "fld/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/core.h>

#include "fld/operator.hpp"
#include "fld/precond.hpp"

namespace fld::bench {

using kernels::KernelPath;
using Clock = std::chrono::steady_clock;

std::string_view to_string(BenchKernel k) noexcept {
    switch (k) {
    case BenchKernel::Matvec: return "MATVEC";
    case BenchKernel::Dprod: return "DPROD";
    case BenchKernel::Daxpy: return "DAXPY";
    case BenchKernel::Dscal: return "DSCAL";
    case BenchKernel::Ddaxpy: return "DDAXPY";
    case BenchKernel::Spai: return "SPAI";
    }
    return "?";
}

BenchKernel parse_kernel(std::string_view text) {
    std::string up(text);
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (BenchKernel k : {BenchKernel::Matvec, BenchKernel::Dprod, BenchKernel::Daxpy, BenchKernel::Dscal,
                          BenchKernel::Ddaxpy, BenchKernel::Spai}) {
        if (up == to_string(k)) return k;
    }
    throw std::invalid_argument(fmt::format("unknown bench kernel '{}'", text));
}

void BenchConfig::validate() const {
    if (n < 1) throw std::invalid_argument(fmt::format("bench.n must be >= 1 (got {})", n));
    if (reps < 1) throw std::invalid_argument(fmt::format("bench.reps must be >= 1 (got {})", reps));
    if (warmup_reps < 0) {
        throw std::invalid_argument(fmt::format("bench.warmup must be >= 0 (got {})", warmup_reps));
    }
    if (kernels.empty()) throw std::invalid_argument("bench.kernels must name at least one kernel");
    if (paths.empty()) throw std::invalid_argument("bench.paths must name at least one path");
}

const KernelTiming* BenchReport::find(BenchKernel k, KernelPath p) const {
    for (const auto& r : rows) {
        if (r.kernel == k && r.path == p) return &r;
    }
    return nullptr;
}

std::optional<double> BenchReport::ratio(BenchKernel k) const {
    const auto* s = find(k, KernelPath::ScalarReference);
    const auto* v = find(k, KernelPath::Vectorized);
    if (!s || !v || !(s->total_s > 0.0)) return std::nullopt;
    return v->total_s / s->total_s;
}

bool checksums_agree(const KernelTiming& a, const KernelTiming& b) {
    const double scale = std::max(a.checksum_magnitude, b.checksum_magnitude);
    return std::abs(a.checksum - b.checksum) <= kernels::kDotReassociationTolerance * scale;
}

bool BenchReport::checksums_agree() const {
    for (const auto& r : rows) {
        if (r.path != KernelPath::ScalarReference) continue;
        const auto* v = find(r.kernel, KernelPath::Vectorized);
        if (v && !bench::checksums_agree(r, *v)) return false;
    }
    return true;
}

double measure_timer_resolution_ns() {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 64; ++k) {
        const auto t0 = Clock::now();
        auto t1 = Clock::now();
        while (t1 == t0) t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    return best;
}

namespace {

volatile double warmup_sink = 0.0;

/// Inputs and outputs for one kernel on one path, plus the per-call body.
class KernelCase {
public:
    KernelCase(const BenchConfig& cfg, BenchKernel kernel, KernelPath path)
        : kernel_(kernel), path_(path), n_(static_cast<std::size_t>(cfg.n)) {
        std::mt19937_64 rng(cfg.rng_seed);
        std::uniform_real_distribution<double> dist(0.5, 1.5);
        for (auto* v : {&x_, &y_, &z_}) {
            v->resize(n_);
            for (double& e : *v) e = dist(rng);
        }
        out_.assign(n_, 0.0);
        a_ = dist(rng);
        b_ = dist(rng);
        if (kernel == BenchKernel::Matvec || kernel == BenchKernel::Spai) {
            const GridSpec g{cfg.n, 1, 1, 1.0, 1.0};
            const TileBox box{{0, cfg.n}, {0, 1}};
            const auto faces = FaceCoefficients::uniform(g, box, 1, 1.0);
            const std::vector<double> c{0.0};
            op_ = build_diffusion_operator(g, faces, 1.0, uniform_coupling(g, box, c), BoundaryCondition{});
            xf_ = Field::global(g, 1);
            xf_.unflatten(x_);
            yf_ = Field::global(g, 1);
            if (kernel == BenchKernel::Spai) m_ = build_spai(*op_);
        }
    }

    /// One call; returns this call's checksum contribution.
    double call(long rep) {
        const std::size_t probe = static_cast<std::size_t>(rep) % n_;
        switch (kernel_) {
        case BenchKernel::Dprod: return kernels::dprod(path_, x_, y_);
        case BenchKernel::Daxpy: kernels::daxpy(path_, a_, x_, y_, out_); return out_[probe];
        case BenchKernel::Dscal: kernels::dscal(path_, x_, a_, y_, out_); return out_[probe];
        case BenchKernel::Ddaxpy: kernels::ddaxpy(path_, a_, x_, b_, y_, z_, out_); return out_[probe];
        case BenchKernel::Matvec:
            apply_operator(*op_, xf_, yf_, path_);
            return yf_(static_cast<int>(probe), 0);
        case BenchKernel::Spai:
            apply_precond(*m_, xf_, yf_, path_);
            return yf_(static_cast<int>(probe), 0);
        }
        return 0.0;
    }

private:
    BenchKernel kernel_;
    KernelPath path_;
    std::size_t n_;
    std::vector<double> x_, y_, z_, out_;
    double a_ = 0.0;
    double b_ = 0.0;
    std::optional<OperatorSpec> op_;
    std::optional<PreconditionerSpec> m_;
    Field xf_, yf_;
};

}  // namespace

BenchReport run_kernel_bench(const BenchConfig& cfg) {
    cfg.validate();
    BenchReport report;
    report.config = cfg;
    report.timer_resolution_ns = measure_timer_resolution_ns();
    report.simd_width = kernels::simd_width();
    for (BenchKernel k : cfg.kernels) {
        for (KernelPath p : cfg.paths) {
            KernelCase kc(cfg, k, p);
            double sink = 0.0;
            for (long r = 0; r < cfg.warmup_reps; ++r) sink += kc.call(r);
            KernelTiming t{k, p, cfg.reps};
            const auto t0 = Clock::now();
            for (long r = 0; r < cfg.reps; ++r) {
                const double c = kc.call(r);
                t.checksum += c;
                t.checksum_magnitude += std::abs(c);
            }
            const auto t1 = Clock::now();
            t.total_s = std::chrono::duration<double>(t1 - t0).count();
            t.per_call_ns = t.total_s * 1e9 / static_cast<double>(cfg.reps);
            warmup_sink = sink;
            report.rows.push_back(t);
        }
    }
    return report;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<SweepRow> run_scaling_sweep(const PulseProblem& problem,
                                        const std::vector<std::array<int, 2>>& topologies, int runs) {
    if (runs < 1) throw std::invalid_argument(fmt::format("sweep runs must be >= 1 (got {})", runs));
    problem.validate();
    std::vector<SweepRow> rows;
    for (const auto& [p1, p2] : topologies) {
        SweepRow row;
        row.nprx1 = p1;
        row.nprx2 = p2;
        row.np = p1 * p2;
        std::optional<TileTopology> topo;
        try {
            topo = TileTopology::decompose(problem.grid, p1, p2);
        } catch (const std::invalid_argument& e) {
            row.skipped = true;
            row.reason = e.what();
        }
        if (topo && topo->size() > max_workers()) {
            row.skipped = true;
            row.reason = fmt::format("{} workers exceed the cap of {}", topo->size(), max_workers());
        }
        if (row.skipped) {
            rows.push_back(row);
            continue;
        }
        std::vector<double> times;
        for (int r = 0; r < runs; ++r) {
            const RunReport rep = run(problem, *topo);
            times.push_back(rep.wall_time_s);
            if (r == 0) {
                row.iters_total = rep.total_iterations();
                row.reductions_total = rep.total_reductions();
                row.matvecs_total = rep.total_matvecs();
                row.solves = rep.solves.size();
                row.all_converged = rep.completed && rep.all_converged();
            } else if (rep.total_iterations() != row.iters_total ||
                       rep.total_reductions() != row.reductions_total) {
                row.counts_stable = false;
            }
        }
        row.runs = runs;
        row.time_s_median = median(times);
        row.time_s_min = *std::min_element(times.begin(), times.end());
        rows.push_back(row);
    }
    return rows;
}

void write_kernel_csv(std::ostream& out, const BenchReport& report) {
    out << "kernel,path,total_s,per_call_ns,checksum\n";
    for (const auto& r : report.rows) {
        out << fmt::format("{},{},{:.9e},{:.6f},{:.17g}\n", to_string(r.kernel), kernels::to_string(r.path),
                           r.total_s, r.per_call_ns, r.checksum);
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "np,nx1_tiles,nx2_tiles,time_s_median,time_s_min,iters_total,reductions_total,runs\n";
    for (const auto& r : rows) {
        if (r.skipped) {
            out << fmt::format("{},{},{},skipped,skipped,,,0\n", r.np, r.nprx1, r.nprx2);
            continue;
        }
        out << fmt::format("{},{},{},{:.6f},{:.6f},{},{},{}\n", r.np, r.nprx1, r.nprx2, r.time_s_median,
                           r.time_s_min, r.iters_total, r.reductions_total, r.runs);
    }
}

std::string render_kernel_table(const BenchReport& report) {
    std::string s = fmt::format("{:<8} {:<11} {:>12} {:>14} {:>24} {:>8}\n", "kernel", "path", "total_s",
                                "per_call_ns", "checksum", "ratio");
    for (const auto& r : report.rows) {
        std::string ratio;
        if (r.path == KernelPath::Vectorized) {
            if (auto q = report.ratio(r.kernel)) ratio = fmt::format("{:.3f}", *q);
        }
        s += fmt::format("{:<8} {:<11} {:>12.6f} {:>14.2f} {:>24.17g} {:>8}\n", to_string(r.kernel),
                         kernels::to_string(r.path), r.total_s, r.per_call_ns, r.checksum, ratio);
    }
    s += fmt::format("timer resolution {:.1f} ns, simd width {} doubles\n", report.timer_resolution_ns,
                     report.simd_width);
    return s;
}

std::string render_sweep_table(const std::vector<SweepRow>& rows) {
    std::string s = fmt::format("{:>4} {:>5} {:>5} {:>12} {:>12} {:>10} {:>12} {:>5}\n", "np", "nx1", "nx2",
                                "median_s", "min_s", "iters", "reductions", "runs");
    for (const auto& r : rows) {
        if (r.skipped) {
            s += fmt::format("{:>4} {:>5} {:>5} skipped: {}\n", r.np, r.nprx1, r.nprx2, r.reason);
            continue;
        }
        s += fmt::format("{:>4} {:>5} {:>5} {:>12.4f} {:>12.4f} {:>10} {:>12} {:>5}\n", r.np, r.nprx1, r.nprx2,
                         r.time_s_median, r.time_s_min, r.iters_total, r.reductions_total, r.runs);
    }
    return s;
}

}  // namespace fld::bench
