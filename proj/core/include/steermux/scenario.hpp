#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "steermux/assignment.hpp"
#include "steermux/types.hpp"

namespace steermux {

// Scenario generality levels, in increasing order. Each level keeps the
// structure of the previous ones: misaligned scenarios may still contain
// aligned transmitters, fading scenarios may contain offsets and gains.
enum class ScenarioMode {
    AlignedT0,    // everyone starts at slot 1, symbol-aligned
    SlotAligned,  // staggered arrival slots, symbol-aligned
    Misaligned,   // integer symbol offsets, factor-2 weighting on
    StaticGain,   // per-transmitter complex gain on top of Misaligned
    Fading,       // per-slot channel gains on top of StaticGain
};

const char* to_string(ScenarioMode mode);
ScenarioMode parse_scenario_mode(const std::string& name);

// Whether transmissions at this level use the factor-2 weighting schedule.
inline bool mode_uses_factor2(ScenarioMode mode) { return mode >= ScenarioMode::Misaligned; }

struct TransmitterSpec {
    std::size_t id = 0;              // index into the steering assignment
    std::vector<Complex> packet;     // P symbols, repeated every slot
    std::size_t arrival_slot = 1;    // first slot this transmitter occupies (1-based)
    std::size_t symbol_offset = 0;   // 0 = slot-aligned; p in [1, P) starts mid-slot
    Complex static_gain{1.0, 0.0};
    bool fading = false;             // per-slot CN(0,1) gains drawn from the scenario seed
};

struct Scenario {
    SteeringAssignment assignment;
    std::vector<TransmitterSpec> transmitters;
    std::size_t packet_len = 0;  // P
    double sigma2 = 0.0;         // total complex noise power per sample
    bool factor2_enabled = false;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument on any violation
};

// Channel gain h_k(n) for one transmitter in one slot: 1 unless the spec has
// fading enabled, in which case it is a reproducible CN(0,1) draw keyed by
// (seed, id, slot).
Complex fading_gain(const Scenario& scenario, const TransmitterSpec& spec, std::size_t slot);

}  // namespace steermux
