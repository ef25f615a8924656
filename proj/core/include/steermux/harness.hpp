#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "steermux/decoder.hpp"
#include "steermux/scenario.hpp"

namespace steermux {

struct SweepConfig {
    std::size_t candidate_count = 32;  // M, size of the steering dictionary
    std::size_t active_count = 8;      // K transmitters drawn per trial
    std::size_t packet_len = 24;       // P symbols per slot
    std::vector<double> sigma2_grid;   // empty selects the ten-decade default
    std::vector<std::size_t> extra_slots_grid;  // empty selects {1, 2, 3, 5}
    std::size_t trials = 1000;
    ScenarioMode mode = ScenarioMode::AlignedT0;
    // Symbol-error regime with the transmitter set known to the receiver:
    // identification is forced correct and only least-squares errors remain.
    bool known_ids = false;
    std::uint64_t seed = 0;
    std::size_t preamble_len = 4;
    std::size_t threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

// sigma2 = 1e-6 .. 1e3, one point per decade.
std::vector<double> default_sigma2_grid();

inline double snr_db_from_sigma2(double sigma2) {
    return 10.0 * std::log10(1.0 / sigma2);
}

struct TrialStats {
    std::size_t detected_correct = 0;
    double ser = 1.0;
    std::size_t n_used = 0;
    bool decode_ok = false;
};

struct SweepPoint {
    double snr_db = 0.0;
    double sigma2 = 0.0;
    std::size_t extra_slots = 0;
    ScenarioMode mode = ScenarioMode::AlignedT0;
    std::size_t trials = 0;
    double mean_detected = 0.0;
    double mean_ser = 0.0;
    double mean_n_used = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

// One random trial scenario. All draws are keyed by (seed, trial), never by
// sigma2, so sweep points along the SNR axis compare the same traffic under
// scaled noise (common random numbers). Arrival slots are the one quantity
// that reads extra_slots: traffic must fit the collection window, so staggered
// modes spread arrivals over a window that grows with the slot budget.
Scenario make_trial_scenario(const SweepConfig& config, double sigma2, std::size_t extra_slots,
                             std::uint64_t trial);

// Receiver-side information for decoding a scenario: noise level and mode,
// plus packet preambles (misaligned modes and up) and the per-slot channel
// gains over the first n_rows slots (fading mode).
DecodeParams side_info_params(const Scenario& scenario, ScenarioMode mode, double sigma2,
                              std::size_t extra_slots, std::size_t preamble_len,
                              std::size_t n_rows);

// Fraction of true symbols decoded wrongly, after rounding both sides to the
// nearest integer in [0, 255]. Transmitters absent from the match list count
// as fully wrong.
double packet_symbol_error_rate(const Scenario& scenario,
                                const std::vector<TransmitterMatch>& matches);

TrialStats run_trial(const SweepConfig& config, double sigma2, std::size_t extra_slots,
                     std::uint64_t trial);

// Aggregates run_trial over the (sigma2 x extra_slots) grid. Trials are
// independently seeded and may run on any number of threads; per-point
// reduction happens in trial order, so the result is bitwise identical
// regardless of parallelism.
SweepResult run_sweep(const SweepConfig& config);

struct ThroughputPoint {
    std::size_t k = 0;
    std::size_t n_used = 0;
    double ratio = 0.0;  // K / N, or 0 when the decode failed
};

// Slot cost of the protocol: K transmitters all arriving at slot 1, either
// aligned (mode AlignedT0) or all misaligned (mode Misaligned). The packet
// length is sized per K so the receiver always has symbol headroom.
std::vector<ThroughputPoint> measure_throughput(std::span<const std::size_t> k_grid,
                                                ScenarioMode mode, double sigma2,
                                                std::size_t extra_slots, std::uint64_t seed);

// CSV with the fixed header
// snr_db,sigma2,extra_slots,mode,trials,mean_detected,mean_ser,mean_n_used
// and floats printed to 6 significant digits.
void write_csv(const SweepResult& result, std::ostream& os);

// Flat key=value rendering of the same table for scripts.
void write_summary(const SweepResult& result, std::ostream& os);

// gnuplot script rendering detected-vs-SNR and SER-vs-SNR, one curve per
// extra_slots value, reading the CSV at csv_path.
void write_plot_script(const SweepResult& result, const std::string& csv_path, std::ostream& os);

}  // namespace steermux
