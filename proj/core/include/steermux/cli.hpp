#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace steermux {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDecodeFailure = 1;
inline constexpr int kExitBadInput = 2;  // config parse errors, format violations
inline constexpr int kExitUnwritableOutput = 3;

struct CliOptions {
    std::string config_path;
    std::string matrix_path;              // replay input
    std::string output_path;              // sweep CSV, or run's matrix dump
    std::optional<std::uint64_t> seed;    // overrides the config seed
    std::optional<std::size_t> threads;   // overrides the sweep thread count
    bool verbose = false;
};

// Simulates one configured scenario and decodes it, tracing the per-slot rank
// evolution and (verbose) the per-shift root sets. Writes the collected
// matrix to output_path when given.
int cmd_run(const CliOptions& options, std::ostream& out, std::ostream& err);

// Runs the configured sweep and writes the CSV to output_path (default
// sweep.csv) plus a companion .gp plot script; prints the key=value summary.
int cmd_sweep(const CliOptions& options, std::ostream& out, std::ostream& err);

// Decodes a stored matrix against the configured assignment, comparing with
// the configured transmitters when any are present.
int cmd_replay(const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace steermux
