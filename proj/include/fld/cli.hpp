#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fld/config.hpp"
#include "fld/pulse.hpp"

namespace fld::cli {

inline constexpr int kExitOk = 0;
/// A solve did not converge, a check failed, or bench checksums disagreed.
inline constexpr int kExitFailure = 1;
/// Bad command line, unreadable or invalid config.
inline constexpr int kExitUsage = 2;

struct CommandOptions {
    std::optional<std::filesystem::path> config;
    std::vector<std::string> overrides;
    std::filesystem::path output_dir = ".";
    std::optional<std::string> topologies;
    int snapshot_every = 0;
    /// verify: nullopt runs every check.
    std::optional<std::vector<std::string>> checks;
    /// verify test hook: "" or "stencil".
    std::string inject_fault;
};

/// Config file (or defaults) with overrides applied and validated.
[[nodiscard]] RunConfig resolve_config(const CommandOptions& opts);

/// "1x1,10x1,5x4" -> {{1,1},{10,1},{5,4}}; throws std::invalid_argument.
[[nodiscard]] std::vector<std::array<int, 2>> parse_topology_list(const std::string& text);

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_bench(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_scale(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Structured text report for `fld2d run`.
void write_run_report(std::ostream& out, const RunConfig& cfg, const RunReport& report);

/// FNV-1a over the little-endian bytes of the interior values.
[[nodiscard]] std::uint64_t field_hash(const Field& f);

inline constexpr const char* kRunReportFile = "run_report.txt";
inline constexpr const char* kBenchCsvFile = "bench_kernels.csv";
inline constexpr const char* kScaleCsvFile = "scale.csv";

}  // namespace fld::cli
