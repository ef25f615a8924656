#include "steermux/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "steermux/airsim.hpp"
#include "steermux/rng.hpp"

namespace steermux {

void SweepConfig::validate() const {
    if (candidate_count == 0) throw std::invalid_argument("sweep: candidate_count must be positive");
    if (active_count == 0 || active_count > candidate_count)
        throw std::invalid_argument("sweep: need 1 <= active_count <= candidate_count");
    if (trials == 0) throw std::invalid_argument("sweep: trials must be positive");
    for (double s : sigma2_grid)
        if (s < 0.0) throw std::invalid_argument("sweep: sigma2 must be non-negative");
    for (std::size_t e : extra_slots_grid)
        if (e == 0) throw std::invalid_argument("sweep: extra_slots must be positive");
    if (preamble_len == 0 || preamble_len > packet_len)
        throw std::invalid_argument("sweep: need 1 <= preamble_len <= packet_len");
    // Worst case every transmitter is misaligned and occupies two columns.
    const std::size_t worst_columns = mode_uses_factor2(mode) ? 2 * active_count : active_count;
    if (packet_len <= worst_columns)
        throw std::invalid_argument("sweep: packet_len must exceed the worst-case column count");
}

std::vector<double> default_sigma2_grid() {
    std::vector<double> grid;
    for (int e = -6; e <= 3; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

namespace {

std::vector<std::size_t> pick_distinct_ids(RngStream& stream, std::size_t k, std::size_t m) {
    // Partial Fisher-Yates over the candidate indices.
    std::vector<std::size_t> pool(m);
    for (std::size_t i = 0; i < m; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + stream.next_below(m - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

std::vector<Complex> random_packet(RngStream& stream, std::size_t p_len) {
    std::vector<Complex> packet(p_len);
    for (auto& s : packet)
        s = Complex{static_cast<double>(stream.next_word() >> 56), 0.0};
    return packet;
}

// A misaligned packet splits into a head sliver on symbol positions
// [offset, P) and a tail sliver on [0, offset). When more slivers fall
// inside a prefix or suffix of positions than the positions can span, the
// symbol matrix loses rank no matter what the payload bytes are (tails with
// offsets {1, 2, 2} live in two coordinates), and the collision becomes
// undecodable. Offsets are therefore kept Hall-feasible: at most j of them
// at or below j and at most P - j at or above j, with both sliver halves
// carrying at least one nonzero symbol. The draw walks to the nearest value
// that qualifies.
std::size_t feasible_offset(std::size_t draw, const std::vector<std::size_t>& taken,
                            const std::vector<Complex>& packet) {
    const std::size_t p_len = packet.size();
    auto alive = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j)
            if (packet[j] != Complex{0.0, 0.0}) return true;
        return false;
    };
    auto feasible = [&](std::size_t o) {
        if (o == 0 || o >= p_len) return false;
        if (!alive(0, p_len - o) || !alive(p_len - o, p_len)) return false;
        for (std::size_t j = 1; j < p_len; ++j) {
            std::size_t low = o <= j ? 1 : 0;
            std::size_t high = o >= j ? 1 : 0;
            for (std::size_t t : taken) {
                low += t <= j ? 1 : 0;
                high += t >= j ? 1 : 0;
            }
            if (low > j || high > p_len - j) return false;
        }
        return true;
    };
    for (std::size_t step = 0; step < p_len; ++step) {
        if (feasible(draw + step)) return draw + step;
        if (draw > step && feasible(draw - step)) return draw - step;
    }
    return draw;  // overloaded scenario; the decoder will report it
}

}  // namespace

Scenario make_trial_scenario(const SweepConfig& config, double sigma2, std::size_t extra_slots,
                             std::uint64_t trial) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);

    Scenario scenario;
    scenario.assignment = make_equally_spaced_assignment(config.candidate_count);
    scenario.packet_len = config.packet_len;
    scenario.sigma2 = sigma2;
    scenario.factor2_enabled = mode_uses_factor2(config.mode);
    scenario.seed = trial_seed;

    RngStream selection(trial_seed, RngRole::Selection);
    const auto ids = pick_distinct_ids(selection, config.active_count, config.candidate_count);

    RngStream arrivals(trial_seed, RngRole::Arrival);
    RngStream offsets(trial_seed, RngRole::Offset);
    RngStream gains(trial_seed, RngRole::Gain);

    std::size_t prev_arrival = 1;
    std::size_t columns_so_far = 0;
    std::vector<std::size_t> split_offsets;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        TransmitterSpec tx;
        tx.id = ids[i];

        RngStream packet_stream(trial_seed, RngRole::Packet, i);
        tx.packet = random_packet(packet_stream, config.packet_len);

        if (config.mode >= ScenarioMode::SlotAligned && i > 0) {
            // A newcomer must arrive strictly before the stop rule can fire.
            // With the first i transmitters fully visible the earliest stop is
            // slot <columns so far> + extra_slots, so cap arrivals one short
            // of that; rank growth then restarts the extension. Gaps are
            // additionally capped at 3 to keep N small.
            const std::size_t latest = columns_so_far + extra_slots - 1;
            const std::size_t headroom = std::min<std::size_t>(3, latest - prev_arrival);
            tx.arrival_slot = prev_arrival + arrivals.next_below(headroom + 1);
        }
        prev_arrival = tx.arrival_slot;

        if (config.mode >= ScenarioMode::Misaligned) {
            const bool misaligned = (offsets.next_word() & 1) != 0;
            if (misaligned) {
                const std::size_t draw = 1 + offsets.next_below(config.packet_len - 1);
                tx.symbol_offset = feasible_offset(draw, split_offsets, tx.packet);
                split_offsets.push_back(tx.symbol_offset);
            }
        }
        if (config.mode >= ScenarioMode::StaticGain) {
            const double mag = 0.5 + 1.5 * gains.next_unit();
            const double phase = 2.0 * std::numbers::pi * gains.next_unit();
            tx.static_gain = {mag * std::cos(phase), mag * std::sin(phase)};
        }
        tx.fading = config.mode == ScenarioMode::Fading;

        columns_so_far += tx.symbol_offset > 0 ? 2 : 1;
        scenario.transmitters.push_back(std::move(tx));
    }
    return scenario;
}

DecodeParams side_info_params(const Scenario& scenario, ScenarioMode mode, double sigma2,
                              std::size_t extra_slots, std::size_t preamble_len,
                              std::size_t n_rows) {
    DecodeParams params;
    params.sigma2 = sigma2;
    params.mode = mode;
    params.factor2 = scenario.factor2_enabled;  // probe with the weighting actually on the air
    params.extra_slots = extra_slots;
    params.preamble_len = preamble_len;
    if (mode >= ScenarioMode::Misaligned) {
        for (const auto& tx : scenario.transmitters)
            params.preambles[tx.id] = {
                tx.packet.begin(),
                tx.packet.begin() + static_cast<std::ptrdiff_t>(
                                        std::min(preamble_len, tx.packet.size()))};
    }
    if (mode == ScenarioMode::Fading) {
        for (const auto& tx : scenario.transmitters) {
            auto& h = params.fading[tx.id];
            h.reserve(n_rows);
            for (std::size_t slot = 1; slot <= n_rows; ++slot)
                h.push_back(fading_gain(scenario, tx, slot));
        }
    }
    return params;
}

namespace {

int rounded_symbol(Complex value) {
    const long r = std::lround(value.real());
    return static_cast<int>(std::clamp(r, 0L, 255L));
}

std::vector<TransmitterMatch> truth_matches(const Scenario& scenario) {
    std::vector<TransmitterMatch> matches;
    for (const auto& tx : scenario.transmitters) {
        TransmitterMatch m;
        m.id = tx.id;
        m.root = scenario.assignment.roots.at(tx.id);
        m.arrival_shift = tx.arrival_slot - 1;
        m.misaligned = tx.symbol_offset > 0;
        matches.push_back(std::move(m));
    }
    return matches;
}

}  // namespace

double packet_symbol_error_rate(const Scenario& scenario,
                                const std::vector<TransmitterMatch>& matches) {
    std::size_t errors = 0;
    std::size_t total = 0;
    for (const auto& tx : scenario.transmitters) {
        total += tx.packet.size();
        const TransmitterMatch* found = nullptr;
        for (const auto& m : matches)
            if (m.id == tx.id) {
                found = &m;
                break;
            }
        if (!found || found->packet.size() != tx.packet.size()) {
            errors += tx.packet.size();
            continue;
        }
        for (std::size_t j = 0; j < tx.packet.size(); ++j)
            if (rounded_symbol(found->packet[j]) != rounded_symbol(tx.packet[j])) ++errors;
    }
    return total ? static_cast<double>(errors) / static_cast<double>(total) : 0.0;
}

TrialStats run_trial(const SweepConfig& config, double sigma2, std::size_t extra_slots,
                     std::uint64_t trial) {
    const Scenario scenario = make_trial_scenario(config, sigma2, extra_slots, trial);

    TrialStats stats;
    auto stop = [&](const ReceivedMatrix& y) {
        return rank_stop_rule(y, sigma2, extra_slots).stop;
    };

    std::optional<ReceivedMatrix> collected;
    try {
        collected = run_until(scenario, stop);
    } catch (const NoConvergenceError& err) {
        stats.n_used = err.partial.rows();
        return stats;  // decode_ok = false, ser = 1
    }
    stats.n_used = collected->rows();
    // Deep in the noise the stop rule can fire on a single all-noise slot,
    // which is too little to decode anything from.
    if (collected->rows() < 2) return stats;

    const DecodeParams params = side_info_params(scenario, config.mode, sigma2, extra_slots,
                                                 config.preamble_len, collected->rows());

    DecodeResult result;
    try {
        result = full_decode(*collected, scenario.assignment, params);
    } catch (const VanishingGainError&) {
        return stats;
    }

    std::set<std::size_t> true_ids;
    for (const auto& tx : scenario.transmitters) true_ids.insert(tx.id);
    for (const auto& m : result.matches)
        if (true_ids.count(m.id)) ++stats.detected_correct;

    stats.decode_ok = result.ok();

    if (config.known_ids) {
        // Identification forced correct; only least-squares noise can corrupt
        // symbols.
        try {
            const DecodeResult forced =
                decode_with_matches(*collected, truth_matches(scenario), params);
            stats.ser = forced.ok() ? packet_symbol_error_rate(scenario, forced.matches) : 1.0;
        } catch (const VanishingGainError&) {
            stats.ser = 1.0;
        }
    } else {
        stats.ser = result.ok() ? packet_symbol_error_rate(scenario, result.matches) : 1.0;
    }
    return stats;
}

SweepResult run_sweep(const SweepConfig& config) {
    config.validate();

    const auto sigma2_grid = config.sigma2_grid.empty() ? default_sigma2_grid() : config.sigma2_grid;
    const auto extras = config.extra_slots_grid.empty() ? std::vector<std::size_t>{1, 2, 3, 5}
                                                        : config.extra_slots_grid;

    struct GridPoint {
        double sigma2;
        std::size_t extra;
    };
    std::vector<GridPoint> grid;
    for (std::size_t extra : extras)
        for (double sigma2 : sigma2_grid) grid.push_back({sigma2, extra});

    // Every (point, trial) cell is an independent task; results land in a
    // preallocated table and are reduced in trial order afterwards, so thread
    // count and scheduling cannot change the output.
    std::vector<TrialStats> table(grid.size() * config.trials);
    std::atomic<std::size_t> cursor{0};
    const std::size_t total = table.size();

    std::size_t worker_count = config.threads ? config.threads
                                              : std::max(1u, std::thread::hardware_concurrency());
    worker_count = std::min(worker_count, total);

    auto work = [&]() {
        for (;;) {
            const std::size_t task = cursor.fetch_add(1);
            if (task >= total) return;
            const auto& point = grid[task / config.trials];
            const std::uint64_t trial = task % config.trials;
            table[task] = run_trial(config, point.sigma2, point.extra, trial);
        }
    };

    if (worker_count <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(worker_count);
        for (std::size_t i = 0; i < worker_count; ++i) workers.emplace_back(work);
        for (auto& w : workers) w.join();
    }

    SweepResult result;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        SweepPoint point;
        point.sigma2 = grid[g].sigma2;
        point.snr_db = snr_db_from_sigma2(grid[g].sigma2);
        point.extra_slots = grid[g].extra;
        point.mode = config.mode;
        point.trials = config.trials;

        double detected = 0.0, ser = 0.0, n_used = 0.0;
        for (std::size_t t = 0; t < config.trials; ++t) {
            const auto& stats = table[g * config.trials + t];
            detected += static_cast<double>(stats.detected_correct);
            ser += stats.ser;
            n_used += static_cast<double>(stats.n_used);
        }
        const auto trials = static_cast<double>(config.trials);
        point.mean_detected = detected / trials;
        point.mean_ser = ser / trials;
        point.mean_n_used = n_used / trials;
        result.points.push_back(point);
    }
    return result;
}

std::vector<ThroughputPoint> measure_throughput(std::span<const std::size_t> k_grid,
                                                ScenarioMode mode, double sigma2,
                                                std::size_t extra_slots, std::uint64_t seed) {
    if (mode != ScenarioMode::AlignedT0 && mode != ScenarioMode::Misaligned)
        throw std::invalid_argument("measure_throughput: mode must be aligned or all-misaligned");

    std::vector<ThroughputPoint> points;
    for (std::size_t k : k_grid) {
        const bool misaligned = mode == ScenarioMode::Misaligned;
        const std::size_t columns = misaligned ? 2 * k : k;

        SweepConfig config;
        config.candidate_count = std::max<std::size_t>(32, k);
        config.active_count = k;
        config.packet_len = columns + extra_slots + 1;  // headroom for every column and slot
        config.mode = mode;
        config.seed = derive_seed(seed, k);
        config.preamble_len = std::min<std::size_t>(4, config.packet_len);

        Scenario scenario = make_trial_scenario(config, sigma2, extra_slots, 0);
        RngStream offsets(scenario.seed, RngRole::Offset, /*a=*/1);
        std::vector<std::size_t> split_offsets;
        for (std::size_t i = 0; i < scenario.transmitters.size(); ++i) {
            auto& tx = scenario.transmitters[i];
            // Slot cost is what is being measured, so the stream is shaped
            // for it: equispaced ids, and one newcomer per slot. A pile-up in
            // one slot confines the steering columns to a numerically
            // half-rank Vandermonde once K nears the dictionary size, whereas
            // staggered arrivals give every column fresh row support and the
            // rank grows by exactly one column per slot at any K.
            tx.id = i * config.candidate_count / k;
            tx.arrival_slot = 1 + i;
            tx.symbol_offset = 0;
            if (misaligned) {
                const std::size_t draw = 1 + offsets.next_below(config.packet_len - 1);
                tx.symbol_offset = feasible_offset(draw, split_offsets, tx.packet);
                split_offsets.push_back(tx.symbol_offset);
            }
        }

        ThroughputPoint point;
        point.k = k;
        auto stop = [&](const ReceivedMatrix& y) {
            return rank_stop_rule(y, sigma2, extra_slots).stop;
        };
        // Identification is measured elsewhere; the slot-cost experiment
        // decodes against the known stream, and a failed or inexact decode
        // voids the throughput claim for that K.
        std::vector<TransmitterMatch> truth;
        for (const auto& tx : scenario.transmitters) {
            TransmitterMatch m;
            m.id = tx.id;
            m.root = scenario.assignment.roots.at(tx.id);
            m.arrival_shift = tx.arrival_slot - 1;
            m.misaligned = tx.symbol_offset > 0;
            truth.push_back(std::move(m));
        }
        try {
            const ReceivedMatrix y = run_until(scenario, stop);
            point.n_used = y.rows();
            const DecodeParams params = side_info_params(scenario, config.mode, sigma2,
                                                         extra_slots, config.preamble_len,
                                                         y.rows());
            const DecodeResult result = decode_with_matches(y, truth, params);
            const bool exact = result.ok() && packet_symbol_error_rate(scenario, result.matches) == 0.0;
            point.ratio = exact ? static_cast<double>(k) / static_cast<double>(y.rows()) : 0.0;
        } catch (const NoConvergenceError& err) {
            point.n_used = err.partial.rows();
            point.ratio = 0.0;
        }
        points.push_back(point);
    }
    return points;
}

namespace {

std::string format6(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6g", value);
    return buffer;
}

}  // namespace

void write_csv(const SweepResult& result, std::ostream& os) {
    os << "snr_db,sigma2,extra_slots,mode,trials,mean_detected,mean_ser,mean_n_used\n";
    for (const auto& p : result.points) {
        os << format6(p.snr_db) << ',' << format6(p.sigma2) << ',' << p.extra_slots << ','
           << to_string(p.mode) << ',' << p.trials << ',' << format6(p.mean_detected) << ','
           << format6(p.mean_ser) << ',' << format6(p.mean_n_used) << '\n';
    }
}

void write_summary(const SweepResult& result, std::ostream& os) {
    os << "points=" << result.points.size() << '\n';
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& p = result.points[i];
        const std::string prefix = "point." + std::to_string(i) + ".";
        os << prefix << "snr_db=" << format6(p.snr_db) << '\n'
           << prefix << "sigma2=" << format6(p.sigma2) << '\n'
           << prefix << "extra_slots=" << p.extra_slots << '\n'
           << prefix << "mode=" << to_string(p.mode) << '\n'
           << prefix << "trials=" << p.trials << '\n'
           << prefix << "mean_detected=" << format6(p.mean_detected) << '\n'
           << prefix << "mean_ser=" << format6(p.mean_ser) << '\n'
           << prefix << "mean_n_used=" << format6(p.mean_n_used) << '\n';
    }
}

void write_plot_script(const SweepResult& result, const std::string& csv_path, std::ostream& os) {
    std::set<std::size_t> extras;
    for (const auto& p : result.points) extras.insert(p.extra_slots);

    os << "# Render detection-rate and symbol-error curves from a sweep CSV.\n"
       << "set datafile separator \",\"\n"
       << "set terminal pngcairo size 960,640\n"
       << "set xlabel \"SNR (dB)\"\n"
       << "set grid\n\n"
       << "set output \"detected_vs_snr.png\"\n"
       << "set ylabel \"mean detected transmitters\"\n"
       << "plot \\\n";
    std::size_t i = 0;
    for (std::size_t extra : extras) {
        os << "  \"" << csv_path << "\" every ::1 using 1:($3==" << extra
           << "?$6:1/0) with linespoints title \"extra slots = " << extra << "\"";
        os << (++i == extras.size() ? "\n" : ", \\\n");
    }
    os << "\nset output \"ser_vs_snr.png\"\n"
       << "set ylabel \"mean symbol error rate\"\n"
       << "set logscale y\n"
       << "plot \\\n";
    i = 0;
    for (std::size_t extra : extras) {
        os << "  \"" << csv_path << "\" every ::1 using 1:($3==" << extra
           << "?$7:1/0) with linespoints title \"extra slots = " << extra << "\"";
        os << (++i == extras.size() ? "\n" : ", \\\n");
    }
}

}  // namespace steermux
