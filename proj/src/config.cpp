#include "fld/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace fld {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view v) {
    T out{};
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end || v.empty()) {
        throw std::invalid_argument(fmt::format("'{}' is not a valid number", v));
    }
    return out;
}

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(fmt::format("'{}' is not a boolean", v));
}

struct KeyDef {
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string fmt_double(double v) { return fmt::format("{}", v); }

std::string join_kernels(const std::vector<bench::BenchKernel>& ks) {
    std::string s;
    for (auto k : ks) s += (s.empty() ? "" : ",") + std::string(bench::to_string(k));
    return s;
}

std::string join_paths(const std::vector<kernels::KernelPath>& ps) {
    std::string s;
    for (auto p : ps) s += (s.empty() ? "" : ",") + std::string(kernels::to_string(p));
    return s;
}

// Section order is the serialization order.
const std::vector<std::pair<std::string, std::vector<std::pair<std::string, KeyDef>>>>& schema() {
    using V = std::string_view;
    static const std::vector<std::pair<std::string, std::vector<std::pair<std::string, KeyDef>>>> s = {
        {"grid",
         {
             {"nx1", {[](RunConfig& c, V v) { c.problem.grid.nx1 = parse_number<int>(v); },
                      [](const RunConfig& c) { return std::to_string(c.problem.grid.nx1); }}},
             {"nx2", {[](RunConfig& c, V v) { c.problem.grid.nx2 = parse_number<int>(v); },
                      [](const RunConfig& c) { return std::to_string(c.problem.grid.nx2); }}},
             {"nspecies", {[](RunConfig& c, V v) { c.problem.grid.nspecies = parse_number<int>(v); },
                           [](const RunConfig& c) { return std::to_string(c.problem.grid.nspecies); }}},
             {"dx1", {[](RunConfig& c, V v) { c.problem.grid.dx1 = parse_number<double>(v); },
                      [](const RunConfig& c) { return fmt_double(c.problem.grid.dx1); }}},
             {"dx2", {[](RunConfig& c, V v) { c.problem.grid.dx2 = parse_number<double>(v); },
                      [](const RunConfig& c) { return fmt_double(c.problem.grid.dx2); }}},
         }},
        {"problem",
         {
             {"sigma0", {[](RunConfig& c, V v) { c.problem.sigma0 = parse_number<double>(v); },
                         [](const RunConfig& c) { return fmt_double(c.problem.sigma0); }}},
             {"center",
              {[](RunConfig& c, V v) {
                   const auto parts = split(v, ',');
                   if (parts.size() != 2) throw std::invalid_argument("expected 'x1, x2'");
                   c.problem.center = {parse_number<double>(parts[0]), parse_number<double>(parts[1])};
               },
               [](const RunConfig& c) {
                   return fmt::format("{}, {}", c.problem.center[0], c.problem.center[1]);
               }}},
             {"amplitude", {[](RunConfig& c, V v) { c.problem.amplitude = parse_number<double>(v); },
                            [](const RunConfig& c) { return fmt_double(c.problem.amplitude); }}},
             {"d0", {[](RunConfig& c, V v) { c.problem.d0 = parse_number<double>(v); },
                     [](const RunConfig& c) { return fmt_double(c.problem.d0); }}},
             {"dt", {[](RunConfig& c, V v) { c.problem.dt = parse_number<double>(v); },
                     [](const RunConfig& c) { return fmt_double(c.problem.dt); }}},
             {"nsteps", {[](RunConfig& c, V v) { c.problem.nsteps = parse_number<int>(v); },
                         [](const RunConfig& c) { return std::to_string(c.problem.nsteps); }}},
             {"solves_per_step",
              {[](RunConfig& c, V v) { c.problem.solves_per_step = parse_number<int>(v); },
               [](const RunConfig& c) { return std::to_string(c.problem.solves_per_step); }}},
             {"limiter", {[](RunConfig& c, V v) { c.problem.limiter = parse_limiter(v); },
                          [](const RunConfig& c) { return std::string(to_string(c.problem.limiter)); }}},
             {"exchange", {[](RunConfig& c, V v) { c.problem.exchange = parse_number<double>(v); },
                           [](const RunConfig& c) { return fmt_double(c.problem.exchange); }}},
             {"boundary",
              {[](RunConfig& c, V v) {
                   if (v == "zero_flux") {
                       c.problem.bc.kind = BoundaryCondition::Kind::ZeroFlux;
                   } else if (v == "dirichlet") {
                       c.problem.bc.kind = BoundaryCondition::Kind::Dirichlet;
                   } else {
                       throw std::invalid_argument(fmt::format("unknown boundary '{}'", v));
                   }
               },
               [](const RunConfig& c) {
                   return std::string(c.problem.bc.kind == BoundaryCondition::Kind::ZeroFlux ? "zero_flux"
                                                                                            : "dirichlet");
               }}},
             {"boundary_value", {[](RunConfig& c, V v) { c.problem.bc.value = parse_number<double>(v); },
                                 [](const RunConfig& c) { return fmt_double(c.problem.bc.value); }}},
         }},
        {"solver",
         {
             {"tol", {[](RunConfig& c, V v) { c.problem.solver.tol = parse_number<double>(v); },
                      [](const RunConfig& c) { return fmt_double(c.problem.solver.tol); }}},
             {"max_iter",
              {[](RunConfig& c, V v) {
                   if (v == "auto") {
                       c.problem.solver.max_iter.reset();
                   } else {
                       c.problem.solver.max_iter = parse_number<int>(v);
                   }
               },
               [](const RunConfig& c) {
                   return c.problem.solver.max_iter ? std::to_string(*c.problem.solver.max_iter)
                                                    : std::string("auto");
               }}},
             {"variant", {[](RunConfig& c, V v) { c.problem.solver.variant = parse_variant(v); },
                          [](const RunConfig& c) { return std::string(to_string(c.problem.solver.variant)); }}},
             {"precond", {[](RunConfig& c, V v) { c.problem.solver.precond = parse_preconditioner(v); },
                          [](const RunConfig& c) { return std::string(to_string(c.problem.solver.precond)); }}},
             {"path", {[](RunConfig& c, V v) { c.problem.solver.path = kernels::parse_kernel_path(v); },
                       [](const RunConfig& c) { return std::string(kernels::to_string(c.problem.solver.path)); }}},
             {"warm_start", {[](RunConfig& c, V v) { c.problem.solver.warm_start = parse_bool(v); },
                             [](const RunConfig& c) {
                                 return std::string(c.problem.solver.warm_start ? "true" : "false");
                             }}},
         }},
        {"topology",
         {
             {"nprx1", {[](RunConfig& c, V v) { c.nprx1 = parse_number<int>(v); },
                        [](const RunConfig& c) { return std::to_string(c.nprx1); }}},
             {"nprx2", {[](RunConfig& c, V v) { c.nprx2 = parse_number<int>(v); },
                        [](const RunConfig& c) { return std::to_string(c.nprx2); }}},
         }},
        {"bench",
         {
             {"n", {[](RunConfig& c, V v) { c.bench.n = parse_number<int>(v); },
                    [](const RunConfig& c) { return std::to_string(c.bench.n); }}},
             {"reps", {[](RunConfig& c, V v) { c.bench.reps = parse_number<long>(v); },
                       [](const RunConfig& c) { return std::to_string(c.bench.reps); }}},
             {"warmup", {[](RunConfig& c, V v) { c.bench.warmup_reps = parse_number<long>(v); },
                         [](const RunConfig& c) { return std::to_string(c.bench.warmup_reps); }}},
             {"seed", {[](RunConfig& c, V v) { c.bench.rng_seed = parse_number<std::uint64_t>(v); },
                       [](const RunConfig& c) { return std::to_string(c.bench.rng_seed); }}},
             {"kernels",
              {[](RunConfig& c, V v) {
                   c.bench.kernels.clear();
                   for (auto part : split(v, ',')) c.bench.kernels.push_back(bench::parse_kernel(part));
               },
               [](const RunConfig& c) { return join_kernels(c.bench.kernels); }}},
             {"paths",
              {[](RunConfig& c, V v) {
                   c.bench.paths.clear();
                   for (auto part : split(v, ',')) c.bench.paths.push_back(kernels::parse_kernel_path(part));
               },
               [](const RunConfig& c) { return join_paths(c.bench.paths); }}},
             {"runs", {[](RunConfig& c, V v) { c.sweep_runs = parse_number<int>(v); },
                       [](const RunConfig& c) { return std::to_string(c.sweep_runs); }}},
         }},
    };
    return s;
}

const KeyDef* find_key(std::string_view section, std::string_view key) {
    for (const auto& [sec, keys] : schema()) {
        if (sec != section) continue;
        for (const auto& [name, def] : keys) {
            if (name == key) return &def;
        }
    }
    return nullptr;
}

bool known_section(std::string_view section) {
    return std::any_of(schema().begin(), schema().end(), [&](const auto& s) { return s.first == section; });
}

}  // namespace

void RunConfig::set(std::string_view section, std::string_view key, std::string_view value) {
    if (!known_section(section)) throw ConfigError(fmt::format("unknown section [{}]", section));
    const KeyDef* def = find_key(section, key);
    if (!def) throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
    try {
        def->set(*this, trim(value));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("{}.{}: {}", section, key, e.what()));
    }
}

RunConfig RunConfig::parse(std::string_view text, const std::string& source) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = trim(line);
        if (line.empty()) continue;
        auto fail = [&](const std::string& msg) {
            return ConfigError(fmt::format("{}:{}: {}", source, line_no, msg), line_no);
        };
        if (line.front() == '[') {
            if (line.back() != ']') throw fail("malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_section(section)) throw fail(fmt::format("unknown section [{}]", section));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw fail("expected 'key = value'");
        if (section.empty()) throw fail("key outside of any section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (!seen.insert(section + "." + key).second) throw fail(fmt::format("duplicate key {}.{}", section, key));
        try {
            cfg.set(section, key, value);
        } catch (const ConfigError& e) {
            throw fail(e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

void RunConfig::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
        throw ConfigError(fmt::format("override '{}' is not of the form section.key=value", assignment));
    }
    try {
        set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
            assignment.substr(eq + 1));
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("override '{}': {}", assignment, e.what()));
    }
}

std::string RunConfig::to_ini() const {
    std::string out;
    for (const auto& [section, keys] : schema()) {
        out += fmt::format("[{}]\n", section);
        for (const auto& [name, def] : keys) out += fmt::format("{} = {}\n", name, def.get(*this));
        out += "\n";
    }
    return out;
}

void RunConfig::validate() const {
    try {
        problem.validate();
        bench.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (sweep_runs < 1) throw ConfigError(fmt::format("bench.runs must be >= 1 (got {})", sweep_runs));
    if (nprx1 < 1 || nprx1 > problem.grid.nx1) {
        throw ConfigError(fmt::format("topology.nprx1 must be in [1, grid.nx1 = {}] (got {})", problem.grid.nx1, nprx1));
    }
    if (nprx2 < 1 || nprx2 > problem.grid.nx2) {
        throw ConfigError(fmt::format("topology.nprx2 must be in [1, grid.nx2 = {}] (got {})", problem.grid.nx2, nprx2));
    }
    if (nprx1 * nprx2 > max_workers()) {
        throw ConfigError(fmt::format("topology.nprx1 * topology.nprx2 = {} exceeds the worker cap {}",
                                      nprx1 * nprx2, max_workers()));
    }
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_ini()); }

std::string RunConfig::hash_hex() const { return fmt::format("{:016x}", hash()); }

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [section, keys] : schema()) {
        for (const auto& [name, def] : keys) out.push_back(section + "." + name);
    }
    return out;
}

}  // namespace fld
