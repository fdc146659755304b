#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fld/bench.hpp"
#include "fld/pulse.hpp"

namespace fld {

/// Parse or validation failure. `line` is 0 when no file line applies.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = 0) : std::runtime_error(message), line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

/// Effective configuration of one fld2d invocation.
///
/// File format: `[section]` headers, `key = value` lines, `#` or `;` comments.
/// Every key is optional; unknown sections or keys are errors.
struct RunConfig {
    PulseProblem problem;
    int nprx1 = 1;
    int nprx2 = 1;
    bench::BenchConfig bench;
    /// Repeats per topology in `fld2d scale`.
    int sweep_runs = 3;

    [[nodiscard]] static RunConfig parse(std::string_view text, const std::string& source = "<config>");
    [[nodiscard]] static RunConfig load(const std::filesystem::path& path);

    /// Applies "section.key=value". Throws ConfigError.
    void apply_override(std::string_view assignment);
    /// Sets one key from its text value. Throws ConfigError.
    void set(std::string_view section, std::string_view key, std::string_view value);

    /// Every key, in a form `parse` reads back to an identical config.
    [[nodiscard]] std::string to_ini() const;

    /// Checks every module invariant; throws ConfigError naming the key.
    void validate() const;

    /// FNV-1a 64 of to_ini().
    [[nodiscard]] std::uint64_t hash() const;
    [[nodiscard]] std::string hash_hex() const;

    /// All accepted "section.key" names.
    [[nodiscard]] static std::vector<std::string> keys();
};

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes,
                                    std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace fld
