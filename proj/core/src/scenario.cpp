#include "steermux/scenario.hpp"

#include <set>
#include <stdexcept>

#include "steermux/rng.hpp"

namespace steermux {

const char* to_string(ScenarioMode mode) {
    switch (mode) {
        case ScenarioMode::AlignedT0: return "aligned_t0";
        case ScenarioMode::SlotAligned: return "slot_aligned";
        case ScenarioMode::Misaligned: return "misaligned";
        case ScenarioMode::StaticGain: return "static_gain";
        case ScenarioMode::Fading: return "fading";
    }
    return "unknown";
}

ScenarioMode parse_scenario_mode(const std::string& name) {
    if (name == "aligned_t0") return ScenarioMode::AlignedT0;
    if (name == "slot_aligned") return ScenarioMode::SlotAligned;
    if (name == "misaligned") return ScenarioMode::Misaligned;
    if (name == "static_gain") return ScenarioMode::StaticGain;
    if (name == "fading") return ScenarioMode::Fading;
    throw std::invalid_argument("unknown scenario mode: " + name);
}

void Scenario::validate() const {
    if (packet_len == 0) throw std::invalid_argument("scenario: packet_len must be positive");
    if (sigma2 < 0.0) throw std::invalid_argument("scenario: sigma2 must be non-negative");

    std::size_t misaligned = 0;
    std::set<std::size_t> ids;
    for (const auto& tx : transmitters) {
        if (tx.id >= assignment.size())
            throw std::invalid_argument("scenario: transmitter id outside the assignment");
        if (!ids.insert(tx.id).second)
            throw std::invalid_argument("scenario: transmitter ids must be distinct");
        if (tx.arrival_slot < 1)
            throw std::invalid_argument("scenario: arrival_slot is 1-based");
        if (tx.packet.size() != packet_len)
            throw std::invalid_argument("scenario: packet length != packet_len");
        if (tx.symbol_offset >= packet_len)
            throw std::invalid_argument("scenario: symbol_offset must be in [0, packet_len)");
        if (tx.symbol_offset > 0) ++misaligned;
    }
    // Packet headroom: every occupied steering column needs an independent
    // symbol row, and misaligned transmitters occupy two columns each.
    if (packet_len <= transmitters.size() + misaligned)
        throw std::invalid_argument("scenario: packet_len must exceed the occupied column count");
}

Complex fading_gain(const Scenario& scenario, const TransmitterSpec& spec, std::size_t slot) {
    if (!spec.fading) return {1.0, 0.0};
    RngStream stream(scenario.seed, RngRole::Fading, spec.id, slot);
    return stream.next_complex_gaussian(1.0);
}

}  // namespace steermux
