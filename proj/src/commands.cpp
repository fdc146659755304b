#include "fld/cli.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "fld/bench.hpp"
#include "fld/field_ops.hpp"
#include "fld/verify.hpp"

namespace fld::cli {

namespace fs = std::filesystem;

RunConfig resolve_config(const CommandOptions& opts) {
    RunConfig cfg = opts.config ? RunConfig::load(*opts.config) : RunConfig{};
    for (const auto& o : opts.overrides) cfg.apply_override(o);
    cfg.validate();
    return cfg;
}

std::vector<std::array<int, 2>> parse_topology_list(const std::string& text) {
    std::vector<std::array<int, 2>> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        out.push_back(parse_topology(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::uint64_t field_hash(const Field& f) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : f.flatten()) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        char bytes[8];
        for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>(bits >> (8 * k));
        h = fnv1a64(std::string_view(bytes, 8), h);
    }
    return h;
}

namespace {

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", (dir / name).string()));
    return f;
}

/// Runs `body`, mapping configuration problems to the usage exit code.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        fmt::print(err, "config error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    }
}

}  // namespace

void write_run_report(std::ostream& out, const RunConfig& cfg, const RunReport& r) {
    fmt::print(out, "# fld2d run report\n# config_hash = {}\n\n[summary]\n", cfg.hash_hex());
    fmt::print(out, "status = {}\n", r.completed && r.all_converged() ? "converged" : "failed");
    fmt::print(out, "steps_completed = {}\n", r.steps_completed);
    fmt::print(out, "solves = {}\n", r.solves.size());
    fmt::print(out, "workers = {}\n", r.workers);
    fmt::print(out, "iterations_total = {}\n", r.total_iterations());
    fmt::print(out, "reductions_total = {}\n", r.total_reductions());
    fmt::print(out, "matvecs_total = {}\n", r.total_matvecs());
    fmt::print(out, "preconditioner_builds = {}\n", r.preconditioner_builds);
    fmt::print(out, "wall_time_s = {:.6f}\n", r.wall_time_s);
    fmt::print(out, "energy_initial = {:.17g}\n", r.energy_initial);
    fmt::print(out, "energy_final = {:.17g}\n", r.energy_final);
    fmt::print(out, "field_checksum = {:.17g}\n", field_ops::local_sum(r.final_field));
    fmt::print(out, "field_hash = {:016x}\n", field_hash(r.final_field));
    if (!r.failure.empty()) fmt::print(out, "failure = {}\n", r.failure);
    fmt::print(out, "\n[solves]\nstep,stage,outcome,iterations,reduction_events,matvecs,final_relative_residual\n");
    for (const auto& s : r.solves) {
        fmt::print(out, "{},{},{},{},{},{},{:.6e}\n", s.step, s.stage, to_string(s.stats.outcome, s.stats.breakdown),
                   s.stats.iterations, s.stats.reduction_events, s.stats.matvec_count,
                   s.stats.final_relative_residual);
    }
    fmt::print(out, "\n# effective config\n");
    std::string ini = cfg.to_ini();
    std::size_t pos = 0;
    while (pos < ini.size()) {
        const auto nl = ini.find('\n', pos);
        fmt::print(out, "# {}\n", ini.substr(pos, nl - pos));
        pos = nl == std::string::npos ? ini.size() : nl + 1;
    }
}

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        const auto topo = TileTopology::decompose(cfg.problem.grid, cfg.nprx1, cfg.nprx2);
        SnapshotHook hook;
        if (opts.snapshot_every > 0) {
            hook.every = opts.snapshot_every;
            hook.sink = [&](int step, const Field& global) {
                auto f = open_output(opts.output_dir, fmt::format("snapshot_{:05d}.bin", step));
                write_field_snapshot(f, global);
            };
        }
        const RunReport report = run(cfg.problem, topo, hook);
        {
            auto f = open_output(opts.output_dir, kRunReportFile);
            write_run_report(f, cfg, report);
        }
        const bool ok = report.completed && report.all_converged();
        fmt::print(out, "config {}: {} solves on {}x{} tiles, {} iterations, {} reductions, {:.3f} s\n",
                   cfg.hash_hex(), report.solves.size(), cfg.nprx1, cfg.nprx2, report.total_iterations(),
                   report.total_reductions(), report.wall_time_s);
        fmt::print(out, "field checksum {:.17g}, hash {:016x}\n", field_ops::local_sum(report.final_field),
                   field_hash(report.final_field));
        if (!ok) fmt::print(err, "run failed: {}\n", report.failure);
        fmt::print(out, "report written to {}\n", (opts.output_dir / kRunReportFile).string());
        return ok ? kExitOk : kExitFailure;
    });
}

int cmd_bench(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        const auto report = bench::run_kernel_bench(cfg.bench);
        {
            auto f = open_output(opts.output_dir, kBenchCsvFile);
            fmt::print(f, "# config_hash = {}\n", cfg.hash_hex());
            bench::write_kernel_csv(f, report);
        }
        out << bench::render_kernel_table(report);
        if (!report.checksums_agree()) {
            fmt::print(err, "scalar and vectorized checksums disagree\n");
            return kExitFailure;
        }
        return kExitOk;
    });
}

int cmd_scale(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        const auto topologies = opts.topologies ? parse_topology_list(*opts.topologies)
                                                : std::vector<std::array<int, 2>>{{cfg.nprx1, cfg.nprx2}};
        const auto rows = bench::run_scaling_sweep(cfg.problem, topologies, cfg.sweep_runs);
        {
            auto f = open_output(opts.output_dir, kScaleCsvFile);
            fmt::print(f, "# config_hash = {}\n", cfg.hash_hex());
            bench::write_sweep_csv(f, rows);
        }
        out << bench::render_sweep_table(rows);
        bool ok = true;
        for (const auto& r : rows) ok = ok && (r.skipped || r.all_converged);
        return ok ? kExitOk : kExitFailure;
    });
}

int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = resolve_config(opts);
        verify::VerifyOptions vo;
        vo.checks = opts.checks;
        vo.seed = cfg.bench.rng_seed;
        if (opts.inject_fault == "stencil") {
            vo.fault = verify::Fault::PerturbStencil;
        } else if (!opts.inject_fault.empty()) {
            throw std::invalid_argument(fmt::format("unknown fault '{}'", opts.inject_fault));
        }
        const auto results = verify::run_checks(vo);
        bool ok = true;
        for (const auto& r : results) {
            fmt::print(out, "{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
            ok = ok && r.passed;
        }
        fmt::print(out, "{} of {} checks passed\n",
                   std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; }),
                   results.size());
        return ok ? kExitOk : kExitFailure;
    });
}

}  // namespace fld::cli
