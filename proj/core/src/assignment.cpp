#include "steermux/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace steermux {

double angular_distance(double a, double b) {
    double d = a - b;
    return std::abs(std::atan2(std::sin(d), std::cos(d)));
}

double SteeringAssignment::min_spacing() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < angles.size(); ++i)
        for (std::size_t j = i + 1; j < angles.size(); ++j)
            best = std::min(best, angular_distance(angles[i], angles[j]));
    return best;
}

SteeringAssignment make_assignment(std::vector<double> angles) {
    if (angles.empty()) throw std::invalid_argument("make_assignment: no angles");
    for (double a : angles) {
        if (!(a >= 0.0 && a < std::numbers::pi))
            throw std::invalid_argument("make_assignment: angles must lie in [0, pi)");
    }
    auto sorted = angles;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("make_assignment: angles must be distinct");

    SteeringAssignment assignment;
    assignment.angles = std::move(angles);
    assignment.roots.reserve(assignment.angles.size());
    for (double a : assignment.angles)
        assignment.roots.push_back({std::cos(a), std::sin(a)});
    return assignment;
}

SteeringAssignment make_equally_spaced_assignment(std::size_t count) {
    if (count == 0) throw std::invalid_argument("make_equally_spaced_assignment: count must be positive");
    std::vector<double> angles(count);
    for (std::size_t k = 0; k < count; ++k)
        angles[k] = static_cast<double>(k) * std::numbers::pi / static_cast<double>(count);
    return make_assignment(std::move(angles));
}

std::size_t nearest_candidate(const SteeringAssignment& assignment, double angle,
                              double* distance_out) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < assignment.angles.size(); ++k) {
        double d = angular_distance(angle, assignment.angles[k]);
        if (d < best_dist) {
            best_dist = d;
            best = k;
        }
    }
    if (distance_out) *distance_out = best_dist;
    return best;
}

}  // namespace steermux
