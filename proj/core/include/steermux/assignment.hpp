#pragma once

#include <cstddef>
#include <vector>

#include "steermux/types.hpp"

namespace steermux {

// Dictionary of candidate steering angles known to the receiver. Each
// transmitter owns one angle in [0, pi); its root is exp(j*angle). Angles are
// restricted to the upper half circle so roots and their conjugates cannot
// collide across candidates.
struct SteeringAssignment {
    std::vector<double> angles;
    std::vector<Complex> roots;

    std::size_t size() const { return angles.size(); }

    // Smallest pairwise circular gap between candidate angles.
    double min_spacing() const;
};

SteeringAssignment make_assignment(std::vector<double> angles);

// count angles equally spaced in [0, pi): k * pi / count for k = 0..count-1.
SteeringAssignment make_equally_spaced_assignment(std::size_t count);

// Circular distance |wrap(a - b)| in radians.
double angular_distance(double a, double b);

// Index of the candidate whose angle is circularly nearest to `angle`;
// the distance is written through `distance_out` when non-null.
std::size_t nearest_candidate(const SteeringAssignment& assignment, double angle,
                              double* distance_out = nullptr);

}  // namespace steermux
