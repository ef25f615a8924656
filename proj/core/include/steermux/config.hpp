#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "steermux/harness.hpp"
#include "steermux/scenario.hpp"

namespace steermux {

// Parse or validation failure in a config file, positioned at 1-based
// line/column so the CLI can point at the offending text.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::size_t column, const std::string& detail)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + detail),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct ConfigSection {
    std::string name;
    std::size_t line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(std::string_view key) const;
};

struct ParsedConfig {
    std::vector<ConfigSection> sections;

    const ConfigSection* find(std::string_view name) const;
};

// Sectioned key=value text. Lines are `[section]` headers, `key = value`
// pairs, blanks, or full-line `#` comments; keys are unique per section and
// sections unique per file. Syntax violations throw ConfigError.
ParsedConfig parse_config(std::string_view text);

// One concrete scenario plus the receiver-side knobs that are not part of the
// over-the-air model.
struct RunConfig {
    Scenario scenario;
    ScenarioMode mode = ScenarioMode::AlignedT0;  // what the receiver assumes
    std::size_t extra_slots = 5;
    std::size_t preamble_len = 4;
    std::size_t max_slots = 0;  // 0 = default collection cap
};

// Sections: [scenario] (mode, packet_len, seed, factor2, extra_slots,
// preamble_len, max_slots), [assignment] (count or angles), [noise] (sigma2),
// and one [transmitter.i] per transmitter, i contiguous from 0 (id, packet,
// arrival_slot, symbol_offset, gain, fading). Complex values are written
// `re` or `re:im`; lists are comma separated.
RunConfig load_run_config(const ParsedConfig& config);

// Section [sweep]: candidate_count, active_count, packet_len, sigma2,
// extra_slots, trials, mode, known_ids, seed, preamble_len, threads. The two
// grids are optional; leaving them out selects the built-in defaults.
SweepConfig load_sweep_config(const ParsedConfig& config);

// Canonical serializations: every field explicit (plus the optional grids
// when set), shortest exact float formatting, so parsing the output
// reproduces the input value bit for bit.
std::string serialize_run_config(const RunConfig& config);
std::string serialize_sweep_config(const SweepConfig& config);

}  // namespace steermux
