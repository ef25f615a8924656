#include "steermux/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace steermux {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

const ConfigEntry* ConfigSection::find(std::string_view key) const {
    for (const auto& entry : entries)
        if (entry.key == key) return &entry;
    return nullptr;
}

const ConfigSection* ParsedConfig::find(std::string_view name) const {
    for (const auto& section : sections)
        if (section.name == name) return &section;
    return nullptr;
}

ParsedConfig parse_config(std::string_view text) {
    ParsedConfig config;
    ConfigSection* current = nullptr;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        const std::string_view raw = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(line_no, raw.find('[') + 1, "unterminated section header");
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw ConfigError(line_no, raw.find('[') + 1, "empty section name");
            if (config.find(name))
                throw ConfigError(line_no, raw.find('[') + 1,
                                  "duplicate section [" + std::string(name) + "]");
            config.sections.push_back({std::string(name), line_no, {}});
            current = &config.sections.back();
            continue;
        }

        const std::size_t eq = raw.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(line_no, 1, "expected `key = value` or a [section] header");
        const std::string_view key = trim(raw.substr(0, eq));
        const std::string_view value = trim(raw.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, 1, "missing key before `=`");
        if (value.empty()) throw ConfigError(line_no, eq + 2, "missing value after `=`");
        if (!current) throw ConfigError(line_no, 1, "key outside of any [section]");
        if (current->find(key))
            throw ConfigError(line_no, 1, "duplicate key `" + std::string(key) + "` in [" +
                                              current->name + "]");
        current->entries.push_back({std::string(key), std::string(value), line_no});
    }
    return config;
}

namespace {

[[noreturn]] void fail(const ConfigEntry& entry, const std::string& detail) {
    throw ConfigError(entry.line, 1, "key `" + entry.key + "`: " + detail);
}

double double_from(const ConfigEntry& entry, std::string_view text) {
    const std::string_view t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        fail(entry, "`" + std::string(t) + "` is not a number");
    return value;
}

double double_value(const ConfigEntry& entry) { return double_from(entry, entry.value); }

std::uint64_t u64_value(const ConfigEntry& entry) {
    const std::string_view t = trim(entry.value);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        fail(entry, "`" + std::string(t) + "` is not an unsigned integer");
    return value;
}

std::size_t size_value(const ConfigEntry& entry) {
    return static_cast<std::size_t>(u64_value(entry));
}

bool bool_value(const ConfigEntry& entry) {
    if (entry.value == "true") return true;
    if (entry.value == "false") return false;
    fail(entry, "`" + entry.value + "` is not `true` or `false`");
}

Complex complex_from(const ConfigEntry& entry, std::string_view text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos) return {double_from(entry, text), 0.0};
    return {double_from(entry, text.substr(0, colon)), double_from(entry, text.substr(colon + 1))};
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = value.find(',', start);
        parts.push_back(trim(value.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

const ConfigEntry& require(const ConfigSection& section, std::string_view key) {
    const ConfigEntry* entry = section.find(key);
    if (!entry)
        throw ConfigError(section.line, 1,
                          "section [" + section.name + "] is missing key `" + std::string(key) +
                              "`");
    return *entry;
}

const ConfigSection& require_section(const ParsedConfig& config, std::string_view name) {
    const ConfigSection* section = config.find(name);
    if (!section) throw ConfigError(1, 1, "missing section [" + std::string(name) + "]");
    return *section;
}

void reject_unknown(const ConfigSection& section, std::initializer_list<std::string_view> known) {
    for (const auto& entry : section.entries)
        if (std::find(known.begin(), known.end(), entry.key) == known.end())
            throw ConfigError(entry.line, 1,
                              "unknown key `" + entry.key + "` in [" + section.name + "]");
}

ScenarioMode mode_value(const ConfigEntry& entry) {
    try {
        return parse_scenario_mode(entry.value);
    } catch (const std::invalid_argument& err) {
        fail(entry, err.what());
    }
}

}  // namespace

RunConfig load_run_config(const ParsedConfig& config) {
    RunConfig run;

    const ConfigSection& scenario = require_section(config, "scenario");
    reject_unknown(scenario, {"mode", "packet_len", "seed", "factor2", "extra_slots",
                              "preamble_len", "max_slots"});
    run.mode = mode_value(require(scenario, "mode"));
    run.scenario.packet_len = size_value(require(scenario, "packet_len"));
    if (const auto* e = scenario.find("seed")) run.scenario.seed = u64_value(*e);
    run.scenario.factor2_enabled = mode_uses_factor2(run.mode);
    if (const auto* e = scenario.find("factor2")) run.scenario.factor2_enabled = bool_value(*e);
    if (const auto* e = scenario.find("extra_slots")) run.extra_slots = size_value(*e);
    if (const auto* e = scenario.find("preamble_len")) run.preamble_len = size_value(*e);
    if (const auto* e = scenario.find("max_slots")) run.max_slots = size_value(*e);

    const ConfigSection& assignment = require_section(config, "assignment");
    reject_unknown(assignment, {"count", "angles"});
    if (const auto* angles_entry = assignment.find("angles")) {
        if (assignment.find("count"))
            throw ConfigError(angles_entry->line, 1,
                              "[assignment] takes `count` or `angles`, not both");
        std::vector<double> angles;
        for (auto part : split_list(angles_entry->value))
            angles.push_back(double_from(*angles_entry, part));
        run.scenario.assignment = make_assignment(angles);
    } else {
        run.scenario.assignment =
            make_equally_spaced_assignment(size_value(require(assignment, "count")));
    }

    if (const ConfigSection* noise = config.find("noise")) {
        reject_unknown(*noise, {"sigma2"});
        run.scenario.sigma2 = double_value(require(*noise, "sigma2"));
    }

    std::size_t tx_sections = 0;
    for (const auto& section : config.sections)
        if (section.name.starts_with("transmitter.")) ++tx_sections;

    for (std::size_t i = 0; i < tx_sections; ++i) {
        const ConfigSection* tx_section = config.find("transmitter." + std::to_string(i));
        if (!tx_section)
            throw ConfigError(1, 1,
                              "transmitter sections must be numbered contiguously from 0; "
                              "[transmitter." +
                                  std::to_string(i) + "] is missing");
        reject_unknown(*tx_section,
                       {"id", "packet", "arrival_slot", "symbol_offset", "gain", "fading"});

        TransmitterSpec tx;
        tx.id = size_value(require(*tx_section, "id"));
        const ConfigEntry& packet_entry = require(*tx_section, "packet");
        for (auto part : split_list(packet_entry.value))
            tx.packet.push_back(complex_from(packet_entry, part));
        if (const auto* e = tx_section->find("arrival_slot")) tx.arrival_slot = size_value(*e);
        if (const auto* e = tx_section->find("symbol_offset")) tx.symbol_offset = size_value(*e);
        if (const auto* e = tx_section->find("gain")) tx.static_gain = complex_from(*e, e->value);
        tx.fading = run.mode == ScenarioMode::Fading;
        if (const auto* e = tx_section->find("fading")) tx.fading = bool_value(*e);
        run.scenario.transmitters.push_back(std::move(tx));
    }

    for (const auto& section : config.sections) {
        static const std::set<std::string, std::less<>> known{"scenario", "assignment", "noise",
                                                              "sweep"};
        if (known.count(section.name) || section.name.starts_with("transmitter.")) continue;
        throw ConfigError(section.line, 1, "unknown section [" + section.name + "]");
    }
    return run;
}

SweepConfig load_sweep_config(const ParsedConfig& config) {
    const ConfigSection& section = require_section(config, "sweep");
    reject_unknown(section, {"candidate_count", "active_count", "packet_len", "sigma2",
                             "extra_slots", "trials", "mode", "known_ids", "seed", "preamble_len",
                             "threads"});

    SweepConfig sweep;
    if (const auto* e = section.find("candidate_count")) sweep.candidate_count = size_value(*e);
    if (const auto* e = section.find("active_count")) sweep.active_count = size_value(*e);
    if (const auto* e = section.find("packet_len")) sweep.packet_len = size_value(*e);
    if (const auto* e = section.find("sigma2"))
        for (auto part : split_list(e->value)) sweep.sigma2_grid.push_back(double_from(*e, part));
    if (const auto* e = section.find("extra_slots"))
        for (auto part : split_list(e->value)) {
            ConfigEntry piece{e->key, std::string(part), e->line};
            sweep.extra_slots_grid.push_back(size_value(piece));
        }
    if (const auto* e = section.find("trials")) sweep.trials = size_value(*e);
    if (const auto* e = section.find("mode")) sweep.mode = mode_value(*e);
    if (const auto* e = section.find("known_ids")) sweep.known_ids = bool_value(*e);
    if (const auto* e = section.find("seed")) sweep.seed = u64_value(*e);
    if (const auto* e = section.find("preamble_len")) sweep.preamble_len = size_value(*e);
    if (const auto* e = section.find("threads")) sweep.threads = size_value(*e);
    return sweep;
}

namespace {

// Shortest decimal form that parses back to the same double.
std::string fmt(double value) {
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return {buffer, ptr};
}

std::string fmt(Complex value) {
    if (value.imag() == 0.0 && !std::signbit(value.imag())) return fmt(value.real());
    return fmt(value.real()) + ":" + fmt(value.imag());
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt&& format) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format(values[i]);
    }
    return out;
}

const char* bool_name(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string serialize_run_config(const RunConfig& config) {
    std::ostringstream os;
    os << "[scenario]\n"
       << "mode = " << to_string(config.mode) << '\n'
       << "packet_len = " << config.scenario.packet_len << '\n'
       << "seed = " << config.scenario.seed << '\n'
       << "factor2 = " << bool_name(config.scenario.factor2_enabled) << '\n'
       << "extra_slots = " << config.extra_slots << '\n'
       << "preamble_len = " << config.preamble_len << '\n'
       << "max_slots = " << config.max_slots << "\n\n";

    os << "[assignment]\n"
       << "angles = " << join(config.scenario.assignment.angles, [](double a) { return fmt(a); })
       << "\n\n";

    os << "[noise]\n"
       << "sigma2 = " << fmt(config.scenario.sigma2) << '\n';

    for (std::size_t i = 0; i < config.scenario.transmitters.size(); ++i) {
        const auto& tx = config.scenario.transmitters[i];
        os << "\n[transmitter." << i << "]\n"
           << "id = " << tx.id << '\n'
           << "arrival_slot = " << tx.arrival_slot << '\n'
           << "symbol_offset = " << tx.symbol_offset << '\n'
           << "gain = " << fmt(tx.static_gain) << '\n'
           << "fading = " << bool_name(tx.fading) << '\n'
           << "packet = " << join(tx.packet, [](Complex c) { return fmt(c); }) << '\n';
    }
    return os.str();
}

std::string serialize_sweep_config(const SweepConfig& config) {
    std::ostringstream os;
    os << "[sweep]\n"
       << "candidate_count = " << config.candidate_count << '\n'
       << "active_count = " << config.active_count << '\n'
       << "packet_len = " << config.packet_len << '\n';
    if (!config.sigma2_grid.empty())
        os << "sigma2 = " << join(config.sigma2_grid, [](double s) { return fmt(s); }) << '\n';
    if (!config.extra_slots_grid.empty())
        os << "extra_slots = "
           << join(config.extra_slots_grid, [](std::size_t e) { return std::to_string(e); })
           << '\n';
    os << "trials = " << config.trials << '\n'
       << "mode = " << to_string(config.mode) << '\n'
       << "known_ids = " << bool_name(config.known_ids) << '\n'
       << "seed = " << config.seed << '\n'
       << "preamble_len = " << config.preamble_len << '\n'
       << "threads = " << config.threads << '\n';
    return os.str();
}

}  // namespace steermux
