#include "steermux/airsim.hpp"

#include "steermux/algebra.hpp"
#include "steermux/rng.hpp"

namespace steermux {

Complex transmission_coefficient(Complex root, std::size_t m, bool factor2) {
    if (m < 1) throw std::invalid_argument("transmission_coefficient: m is 1-based");
    Complex c = unit_power(root, m - 1);
    if (factor2 && m % 2 == 0) c *= 2.0;
    return c;
}

std::vector<Complex> slot_contribution(const Scenario& scenario, const TransmitterSpec& spec,
                                       std::size_t slot) {
    const std::size_t p_len = scenario.packet_len;
    std::vector<Complex> out(p_len, Complex{0.0, 0.0});
    if (slot < spec.arrival_slot) return out;

    const std::size_t m = slot - spec.arrival_slot + 1;
    const Complex root = scenario.assignment.roots.at(spec.id);

    // Per-slot scalar applied to each term: transmission coefficient, then the
    // static gain, then the channel gain. The multiplies are skipped when the
    // factors are exactly 1 so that a plain scenario and its aligned-pair
    // reconstruction produce bit-identical rows.
    auto term_scale = [&](std::size_t mm) {
        Complex s = transmission_coefficient(root, mm, scenario.factor2_enabled);
        if (spec.static_gain != Complex{1.0, 0.0}) s *= spec.static_gain;
        if (spec.fading) s *= fading_gain(scenario, spec, slot);
        return s;
    };

    if (spec.symbol_offset == 0) {
        const Complex s = term_scale(m);
        for (std::size_t j = 0; j < p_len; ++j) out[j] += s * spec.packet[j];
        return out;
    }

    const auto p = static_cast<std::ptrdiff_t>(spec.symbol_offset);
    const auto len = static_cast<std::ptrdiff_t>(p_len);
    const auto head = shift(spec.packet, p);        // current transmission, delayed by p
    const Complex s_head = term_scale(m);
    for (std::size_t j = 0; j < p_len; ++j) out[j] += s_head * head[j];
    if (m >= 2) {
        const auto tail = shift(spec.packet, p - len);  // spill-over of the previous one
        const Complex s_tail = term_scale(m - 1);
        for (std::size_t j = 0; j < p_len; ++j) out[j] += s_tail * tail[j];
    }
    return out;
}

std::vector<Complex> simulate_slot(const Scenario& scenario, std::size_t slot) {
    if (slot < 1) throw std::invalid_argument("simulate_slot: slots are 1-based");

    std::vector<Complex> row(scenario.packet_len, Complex{0.0, 0.0});
    for (const auto& spec : scenario.transmitters) {
        const auto contribution = slot_contribution(scenario, spec, slot);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += contribution[j];
    }

    if (scenario.sigma2 > 0.0) {
        RngStream noise(scenario.seed, RngRole::Noise, slot);
        for (auto& sample : row) sample += noise.next_complex_gaussian(scenario.sigma2);
    }
    return row;
}

std::size_t virtual_column_count(const Scenario& scenario) {
    std::size_t count = 0;
    for (const auto& spec : scenario.transmitters)
        count += spec.symbol_offset > 0 ? 2 : 1;
    return count;
}

ReceivedMatrix run_until(const Scenario& scenario,
                         const std::function<bool(const ReceivedMatrix&)>& stop,
                         std::size_t max_slots) {
    scenario.validate();
    const std::size_t cap = max_slots ? max_slots : 4 * virtual_column_count(scenario) + 16;

    ReceivedMatrix y(scenario.packet_len);
    for (std::size_t slot = 1; slot <= cap; ++slot) {
        y.push_row(simulate_slot(scenario, slot));
        if (stop(y)) return y;
    }
    throw NoConvergenceError("run_until: stop rule not satisfied within " +
                                 std::to_string(cap) + " slots",
                             std::move(y));
}

}  // namespace steermux
