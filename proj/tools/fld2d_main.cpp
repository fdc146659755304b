#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "fld/cli.hpp"

int main(int argc, char** argv) {
    using namespace fld::cli;
    CLI::App app{"fld2d: matrix-free flux-limited diffusion mini-app"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string config;
    std::string checks;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--set", opts.overrides, "Override one key, section.key=value (repeatable)");
        sub->add_option("--output", opts.output_dir, "Directory for report files");
    };

    auto* run = app.add_subcommand("run", "Time-evolve the Gaussian pulse and write a run report");
    add_common(run);
    run->add_option("--snapshot-every", opts.snapshot_every, "Write a field snapshot every N steps")
        ->check(CLI::NonNegativeNumber);

    auto* bench = app.add_subcommand("bench", "Time the BLAS-1 and matvec kernels on both code paths");
    add_common(bench);

    auto* scale = app.add_subcommand("scale", "Run the pulse on several tile topologies");
    add_common(scale);
    scale->add_option("--topologies", opts.topologies, "Comma-separated list, e.g. 1x1,10x1,5x4");

    auto* verify = app.add_subcommand("verify", "Run the oracle checks");
    add_common(verify);
    auto* checks_opt =
        verify->add_option("--checks", checks, "Comma-separated check names (empty string runs none)");
    verify->add_option("--inject-fault", opts.inject_fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }
    if (!config.empty()) opts.config = config;
    if (checks_opt->count() > 0) {
        std::vector<std::string> names;
        std::size_t start = 0;
        while (start < checks.size()) {
            const auto comma = checks.find(',', start);
            names.push_back(checks.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        opts.checks = names;
    }

    if (run->parsed()) return cmd_run(opts, std::cout, std::cerr);
    if (bench->parsed()) return cmd_bench(opts, std::cout, std::cerr);
    if (scale->parsed()) return cmd_scale(opts, std::cout, std::cerr);
    return cmd_verify(opts, std::cout, std::cerr);
}
