#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fld/cli.hpp"
#include "fld/config.hpp"

using namespace fld;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("fld_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string report_value(const std::string& report, const std::string& key) {
    const auto pos = report.find("\n" + key + " = ");
    if (pos == std::string::npos) return {};
    const auto start = pos + key.size() + 4;
    return report.substr(start, report.find('\n', start) - start);
}

cli::CommandOptions small_run(const fs::path& out) {
    cli::CommandOptions o;
    o.output_dir = out;
    o.overrides = {"grid.nx1=30", "grid.nx2=20", "problem.center=15, 10", "problem.sigma0=3",
                   "problem.dt=0.2", "problem.nsteps=2"};
    return o;
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughIni) {
    const RunConfig d;
    const RunConfig r = RunConfig::parse(d.to_ini());
    EXPECT_EQ(r.to_ini(), d.to_ini());
    EXPECT_EQ(r.hash(), d.hash());
    EXPECT_EQ(d.hash_hex().size(), 16u);
    EXPECT_NO_THROW(d.validate());
}

TEST(Config, ParsesSectionsCommentsAndValues) {
    const auto c = RunConfig::parse(
        "# comment\n[grid]\nnx1 = 50 ; trailing\nnx2=40\n\n[problem]\ncenter = 25, 20\n"
        "limiter = levermore_pomraning\nexchange = 0.25\n[solver]\nvariant = classic\nprecond = block_jacobi\n"
        "max_iter = 77\n[topology]\nnprx1 = 5\nnprx2 = 4\n[bench]\nkernels = dprod, matvec\npaths = vectorized\n");
    EXPECT_EQ(c.problem.grid.nx1, 50);
    EXPECT_EQ(c.problem.grid.nx2, 40);
    EXPECT_EQ(c.problem.center[1], 20.0);
    EXPECT_EQ(c.problem.limiter, Limiter::LevermorePomraning);
    EXPECT_EQ(c.problem.exchange, 0.25);
    EXPECT_EQ(c.problem.solver.variant, BicgstabVariant::Classic);
    EXPECT_EQ(c.problem.solver.precond, PreconditionerKind::BlockJacobi);
    EXPECT_EQ(c.problem.solver.max_iter, 77);
    EXPECT_EQ(c.nprx1 * c.nprx2, 20);
    EXPECT_EQ(c.bench.kernels.size(), 2u);
    EXPECT_EQ(c.bench.paths.size(), 1u);
    EXPECT_EQ(RunConfig::parse(c.to_ini()).to_ini(), c.to_ini());
    EXPECT_NE(c.hash(), RunConfig{}.hash());
}

TEST(Config, DoublesRoundTripExactly) {
    RunConfig c;
    c.apply_override("problem.dt=0.1");
    c.apply_override("solver.tol=3.3e-9");
    const auto r = RunConfig::parse(c.to_ini());
    EXPECT_EQ(r.problem.dt, 0.1);
    EXPECT_EQ(r.problem.solver.tol, 3.3e-9);
}

TEST(Config, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) {
        try {
            (void)RunConfig::parse(text, "t.ini");
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find("t.ini:"), std::string::npos);
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("[grid]\nnx1 = 10\nbogus = 1\n"), 3);
    EXPECT_EQ(line_of("[grid]\nnx1 = 10\n\nnx1 = 12\n"), 4);
    EXPECT_EQ(line_of("[nope]\n"), 1);
    EXPECT_EQ(line_of("nx1 = 3\n"), 1);
    EXPECT_EQ(line_of("[grid]\nnx1 = ten\n"), 2);
    EXPECT_EQ(line_of("[grid]\nnx1\n"), 2);
    EXPECT_EQ(line_of("[solver]\nvariant = pipelined\n"), 2);
}

TEST(Config, OverridesAndValidation) {
    RunConfig c;
    c.apply_override("solver.max_iter=auto");
    EXPECT_FALSE(c.problem.solver.max_iter.has_value());
    EXPECT_THROW(c.apply_override("solver.max_iter"), ConfigError);
    EXPECT_THROW(c.apply_override("nosection=1"), ConfigError);
    EXPECT_THROW(c.apply_override("grid.depth=1"), ConfigError);
    c.apply_override("topology.nprx1=0");
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("topology.nprx1"), std::string::npos);
    }
    c = {};
    c.apply_override("problem.sigma0=1");
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_FALSE(RunConfig::keys().empty());
}

TEST(Config, Fnv1a) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Cli, TopologyList) {
    const auto t = cli::parse_topology_list("1x1,10x1,5x4");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[2], (std::array<int, 2>{5, 4}));
    EXPECT_THROW((void)cli::parse_topology_list("0x4"), std::invalid_argument);
    EXPECT_THROW((void)cli::parse_topology_list("3"), std::invalid_argument);
}

TEST(Cli, RunWithZeroStepsSucceeds) {
    const auto dir = scratch("zero");
    auto o = small_run(dir);
    o.overrides.push_back("problem.nsteps=0");
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_run(o, out, err), cli::kExitOk) << err.str();
    const auto report = slurp(dir / cli::kRunReportFile);
    EXPECT_EQ(report_value(report, "solves"), "0");
    EXPECT_EQ(report_value(report, "status"), "converged");
}

TEST(Cli, RunFailureExitsOneAndReportsOutcome) {
    const auto dir = scratch("fail");
    auto o = small_run(dir);
    o.overrides.push_back("solver.tol=1e-30");
    o.overrides.push_back("solver.max_iter=2");
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_run(o, out, err), cli::kExitFailure);
    const auto report = slurp(dir / cli::kRunReportFile);
    EXPECT_EQ(report_value(report, "status"), "failed");
    EXPECT_NE(report.find(",max_iter,"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
    std::ostringstream out, err;
    cli::CommandOptions o;
    o.output_dir = scratch("usage");
    o.config = "/nonexistent/fld.ini";
    EXPECT_EQ(cli::cmd_run(o, out, err), cli::kExitUsage);
    o.config.reset();
    o.overrides = {"grid.nx1=-3"};
    EXPECT_EQ(cli::cmd_run(o, out, err), cli::kExitUsage);
    o.overrides.clear();
    o.topologies = "0x4";
    EXPECT_EQ(cli::cmd_scale(o, out, err), cli::kExitUsage);
    o.topologies.reset();
    o.inject_fault = "cosmic_ray";
    EXPECT_EQ(cli::cmd_verify(o, out, err), cli::kExitUsage);
}

TEST(Cli, RunWritesReportSnapshotsAndIsDeterministic) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    auto oa = small_run(a);
    oa.snapshot_every = 1;
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_run(oa, out, err), cli::kExitOk) << err.str();
    EXPECT_TRUE(fs::exists(a / "snapshot_00001.bin"));
    EXPECT_TRUE(fs::exists(a / "snapshot_00002.bin"));
    const auto ra = slurp(a / cli::kRunReportFile);
    EXPECT_EQ(report_value(ra, "solves"), "6");

    // Replaying the effective config embedded in the report reproduces the run.
    std::string ini;
    std::istringstream lines(ra.substr(ra.find("# effective config")));
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) ini += line.substr(line.size() >= 2 ? 2 : line.size()) + "\n";
    {
        std::ofstream f(b / "replay.ini");
        f << ini;
    }
    cli::CommandOptions ob;
    ob.output_dir = b;
    ob.config = b / "replay.ini";
    ASSERT_EQ(cli::cmd_run(ob, out, err), cli::kExitOk) << err.str();
    const auto rb = slurp(b / cli::kRunReportFile);
    for (const char* key : {"iterations_total", "reductions_total", "matvecs_total", "field_checksum", "field_hash"}) {
        EXPECT_EQ(report_value(ra, key), report_value(rb, key)) << key;
        EXPECT_FALSE(report_value(ra, key).empty()) << key;
    }
    EXPECT_NE(ra.find("# config_hash = " + RunConfig::parse(ini).hash_hex()), std::string::npos);
}

TEST(Cli, BenchSubsetWritesCsv) {
    const auto dir = scratch("bench");
    cli::CommandOptions o;
    o.output_dir = dir;
    o.overrides = {"bench.kernels=DPROD", "bench.reps=10", "bench.warmup=0"};
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_bench(o, out, err), cli::kExitOk) << err.str();
    const auto csv = slurp(dir / cli::kBenchCsvFile);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);  // hash comment, header, 2 rows
    EXPECT_NE(out.str().find("DPROD"), std::string::npos);
}

TEST(Cli, ScaleWritesOneRowPerTopology) {
    const auto dir = scratch("scale");
    auto o = small_run(dir);
    o.overrides.push_back("bench.runs=1");
    o.topologies = "1x1,2x2";
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_scale(o, out, err), cli::kExitOk) << err.str();
    const auto csv = slurp(dir / cli::kScaleCsvFile);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Cli, VerifySelectionAndFaultInjection) {
    cli::CommandOptions o;
    o.output_dir = scratch("verify");
    std::ostringstream out, err;
    o.checks = std::vector<std::string>{};
    EXPECT_EQ(cli::cmd_verify(o, out, err), cli::kExitOk);
    o.checks = std::vector<std::string>{"operator_assembly"};
    EXPECT_EQ(cli::cmd_verify(o, out, err), cli::kExitOk);
    EXPECT_NE(out.str().find("PASS operator_assembly"), std::string::npos);
    o.inject_fault = "stencil";
    std::ostringstream out2;
    EXPECT_EQ(cli::cmd_verify(o, out2, err), cli::kExitFailure);
    EXPECT_NE(out2.str().find("FAIL operator_assembly"), std::string::npos);
    o.inject_fault.clear();
    o.checks = std::vector<std::string>{"no_such_check"};
    EXPECT_EQ(cli::cmd_verify(o, out, err), cli::kExitUsage);
}
