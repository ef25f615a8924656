#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "steermux/scenario.hpp"
#include "steermux/types.hpp"

namespace steermux {

// Coefficient of a transmitter's m-th transmission (m is 1-based): root^(m-1),
// doubled on even m when the factor-2 schedule is active.
Complex transmission_coefficient(Complex root, std::size_t m, bool factor2);

// Noise-free contribution of one transmitter to the given slot (1-based), as a
// P-vector; all zeros before its arrival slot. A misaligned transmitter sends
// the tail of its previous transmission and the head of the current one:
//   c(m) * shift(packet, p) + c(m-1) * shift(packet, p - P)
// with m = slot - arrival + 1 and the m-1 term absent when m = 1.
std::vector<Complex> slot_contribution(const Scenario& scenario, const TransmitterSpec& spec,
                                       std::size_t slot);

// One received row: superposition of every transmitter's contribution plus
// i.i.d. complex Gaussian noise of total power sigma2 (keyed by slot, so the
// draw is independent of the transmitter list). sigma2 = 0 adds nothing.
std::vector<Complex> simulate_slot(const Scenario& scenario, std::size_t slot);

// Steering columns the scenario occupies: 1 per aligned, 2 per misaligned
// transmitter.
std::size_t virtual_column_count(const Scenario& scenario);

struct NoConvergenceError : std::runtime_error {
    NoConvergenceError(std::string message, ReceivedMatrix collected)
        : std::runtime_error(std::move(message)), partial(std::move(collected)) {}
    ReceivedMatrix partial;
};

// Collects slots until `stop` returns true. `max_slots` of 0 selects the
// default cap of 4 * virtual_column_count + 16; exceeding the cap throws
// NoConvergenceError carrying everything collected so far.
ReceivedMatrix run_until(const Scenario& scenario,
                         const std::function<bool(const ReceivedMatrix&)>& stop,
                         std::size_t max_slots = 0);

}  // namespace steermux
