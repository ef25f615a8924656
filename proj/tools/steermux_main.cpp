#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "steermux/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"steering-vector collision multiplexing toolkit"};
    app.require_subcommand(1);

    steermux::CliOptions options;
    std::uint64_t seed = 0;
    std::size_t threads = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", options.config_path, "scenario/sweep config file");
        cmd->add_option("--out", options.output_path, "output path");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { options.seed = seed; });
        cmd->add_flag("--verbose", options.verbose, "print the full decode trace");
    };

    CLI::App* run = app.add_subcommand("run", "simulate one scenario and decode it");
    add_common(run);

    CLI::App* sweep = app.add_subcommand("sweep", "run a detection/SER sweep, write CSV + plot");
    add_common(sweep);
    sweep->add_option("--threads", threads, "worker threads (0 = hardware)")
        ->each([&](const std::string&) { options.threads = threads; });

    CLI::App* replay = app.add_subcommand("replay", "decode a stored received matrix");
    add_common(replay);
    replay->add_option("matrix", options.matrix_path, "matrix file written by run --out")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return steermux::cmd_run(options, std::cout, std::cerr);
    if (sweep->parsed()) return steermux::cmd_sweep(options, std::cout, std::cerr);
    return steermux::cmd_replay(options, std::cout, std::cerr);
}
