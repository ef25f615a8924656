#include "steermux/decoder.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace steermux {

namespace {

double abs1(const Complex& z) { return std::abs(z.real()) + std::abs(z.imag()); }

// Parlett-Reinsch balancing: diagonal similarity with powers of 2 until row
// and column norms agree. Exact in floating point and routinely worth several
// digits on companion matrices of high-degree polynomials.
void balance_in_place(Eigen::MatrixXcd& m) {
    const Eigen::Index n = m.rows();
    for (bool converged = false; !converged;) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double col = 0.0, row = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                col += abs1(m(j, i));
                row += abs1(m(i, j));
            }
            if (col == 0.0 || row == 0.0) continue;

            const double total = col + row;
            double factor = 1.0;
            while (col < row / 2.0) {
                col *= 2.0;
                row /= 2.0;
                factor *= 2.0;
            }
            while (col > row * 2.0) {
                col /= 2.0;
                row *= 2.0;
                factor /= 2.0;
            }
            if (col + row < 0.95 * total) {
                converged = false;
                m.col(i) *= factor;
                m.row(i) /= factor;
            }
        }
    }
}

Complex horner(std::span<const Complex> coeffs, Complex z) {
    Complex acc{0.0, 0.0};
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
    return acc;
}

// Probe weights on the shifted block: factor-2 doubles the even 1-based block
// positions (odd 0-based), fading scales by the gain of the absolute slot.
Complex probe_weight(std::size_t rel_index, std::size_t shift_d, bool factor2,
                     std::span<const Complex> fading) {
    Complex a{1.0, 0.0};
    if (factor2 && rel_index % 2 == 1) a *= 2.0;
    if (!fading.empty()) a *= fading[shift_d + rel_index];
    return a;
}

}  // namespace

std::size_t singular_value_threshold(const RVector& values_descending, double sigma2,
                                     std::size_t symbols_per_slot, double alpha) {
    if (sigma2 < 0.0) throw std::invalid_argument("singular_value_threshold: sigma2 < 0");
    if (alpha <= 0.0) throw std::invalid_argument("singular_value_threshold: alpha must be positive");

    double tau;
    if (sigma2 > 0.0) {
        tau = alpha * std::sqrt(sigma2 * static_cast<double>(symbols_per_slot));
    } else {
        double top = values_descending.size() ? values_descending(0) : 0.0;
        tau = 1e-9 * std::max(top, 1.0);
    }

    std::size_t count = 0;
    for (Eigen::Index i = 0; i < values_descending.size(); ++i)
        if (values_descending(i) > tau) ++count;
    return count;
}

StopDecision rank_stop_rule(const ReceivedMatrix& y, double sigma2, std::size_t extra_slots,
                            double alpha) {
    const std::size_t n = y.rows();
    if (n == 0) return {false, 0};

    const RVector values = singular_values_of(y.view());
    const std::size_t k_hat = singular_value_threshold(values, sigma2, y.cols(), alpha);
    const bool saturated = k_hat < n;
    return {saturated && n >= k_hat + extra_slots, k_hat};
}

std::vector<Complex> music_polynomial(const CMatrix& noise_basis, std::size_t shift_d,
                                      bool factor2, std::span<const Complex> fading) {
    const auto n = static_cast<std::size_t>(noise_basis.rows());
    if (noise_basis.cols() == 0)
        throw std::invalid_argument("music_polynomial: empty noise basis");
    if (n < 2 || shift_d > n - 2)
        throw std::invalid_argument("music_polynomial: shift out of range (need shift <= N-2)");
    if (!fading.empty() && fading.size() < n)
        throw std::invalid_argument("music_polynomial: fading sequence shorter than N");

    const std::size_t len = n - shift_d;  // L
    const auto li = static_cast<Eigen::Index>(len);

    // C restricted to rows/cols shift_d..N-1; the full product never needs to
    // be formed.
    const CMatrix tail = noise_basis.bottomRows(li);
    CMatrix c_sub = tail * tail.adjoint();

    // B = diag(conj(a)) * C' * diag(a), still Hermitian PSD.
    for (std::size_t i = 0; i < len; ++i) {
        const Complex ai = probe_weight(i, shift_d, factor2, fading);
        for (std::size_t j = 0; j < len; ++j) {
            const Complex aj = probe_weight(j, shift_d, factor2, fading);
            c_sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *=
                std::conj(ai) * aj;
        }
    }

    // Laurent coefficient c_m is the m-th superdiagonal sum; the subdiagonal
    // side is pinned to conj(c_m) so the returned sequence is exactly
    // self-inversive, which downstream root pairing relies on.
    std::vector<Complex> coeffs(2 * len - 1, Complex{0.0, 0.0});
    for (std::size_t m = 0; m < len; ++m) {
        Complex sum{0.0, 0.0};
        for (std::size_t i = 0; i + m < len; ++i)
            sum += c_sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + m));
        coeffs[len - 1 + m] = sum;
        coeffs[len - 1 - m] = std::conj(sum);
    }
    // The diagonal sum is real by construction; make it exactly so.
    coeffs[len - 1] = Complex{coeffs[len - 1].real(), 0.0};
    return coeffs;
}

std::vector<Complex> solve_polynomial(std::span<const Complex> coefficients) {
    if (coefficients.empty())
        throw DegeneratePolynomialError("solve_polynomial: no coefficients");

    double max_mag = 0.0;
    for (const auto& c : coefficients) max_mag = std::max(max_mag, std::abs(c));
    if (max_mag == 0.0)
        throw DegeneratePolynomialError("solve_polynomial: zero polynomial");

    // Trim a numerically-zero leading coefficient rather than dividing by it.
    std::size_t degree = coefficients.size() - 1;
    while (degree > 0 && std::abs(coefficients[degree]) <= 1e-14 * max_mag) --degree;
    if (degree == 0)
        throw DegeneratePolynomialError("solve_polynomial: polynomial is constant");

    std::vector<Complex> monic(degree + 1);
    for (std::size_t i = 0; i <= degree; ++i) monic[i] = coefficients[i] / coefficients[degree];

    const auto di = static_cast<Eigen::Index>(degree);
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(di, di);
    companion.diagonal(-1).setOnes();
    for (Eigen::Index i = 0; i < di; ++i) companion(i, di - 1) = -monic[static_cast<std::size_t>(i)];

    balance_in_place(companion);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw DegeneratePolynomialError("solve_polynomial: eigenvalue iteration failed");

    std::vector<Complex> roots(degree);
    for (std::size_t i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));

    // Self-inversive polynomials (c_i = conj(c_{deg-i})) carry their roots in
    // conjugate-reciprocal pairs; a true unit-circle root is a tangential
    // double zero whose computed pair splits by O(sqrt(eps)) in an arbitrary
    // direction. The pair mean cancels the split to first order, and the
    // partner is found by proximity: pairing through the reflection 1/conj(z)
    // misses tangential splits, whose reflection lands back on z itself.
    // Distinct roots that merely sit close survive the residual check below.
    bool self_inversive = true;
    const std::size_t top = coefficients.size() - 1;
    for (std::size_t i = 0; i <= top; ++i) {
        if (std::abs(coefficients[i] - std::conj(coefficients[top - i])) > 1e-12 * max_mag) {
            self_inversive = false;
            break;
        }
    }
    if (self_inversive) {
        const std::vector<Complex> snapshot = roots;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            Complex& z = roots[i];
            if (std::abs(std::abs(z) - 1.0) >= 1e-3) continue;
            Complex partner = z;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < snapshot.size(); ++j) {
                if (j == i) continue;
                const double dist = std::abs(snapshot[j] - z);
                if (dist < best) {
                    best = dist;
                    partner = snapshot[j];
                }
            }
            if (best < 2e-3 && std::abs(std::abs(partner) - 1.0) < 2e-3) {
                const Complex mean = (z + partner) / 2.0;
                if (std::abs(horner(monic, mean)) <= std::abs(horner(monic, z))) z = mean;
            }
        }
    }
    return roots;
}

double evaluate_music(const CMatrix& noise_basis, std::size_t shift_d, bool factor2,
                      std::span<const Complex> fading, Complex z) {
    const auto n = static_cast<std::size_t>(noise_basis.rows());
    if (n < 2 || shift_d > n - 2)
        throw std::invalid_argument("evaluate_music: shift out of range");
    if (!fading.empty() && fading.size() < n)
        throw std::invalid_argument("evaluate_music: fading sequence shorter than N");

    CVector omega = CVector::Zero(static_cast<Eigen::Index>(n));
    Complex zpow{1.0, 0.0};
    for (std::size_t i = 0; i + shift_d < n; ++i) {
        omega(static_cast<Eigen::Index>(shift_d + i)) =
            probe_weight(i, shift_d, factor2, fading) * zpow;
        zpow *= z;
    }
    return (noise_basis.adjoint() * omega).squaredNorm();
}

namespace {

struct Hypothesis {
    std::size_t candidate = 0;
    std::size_t shift = 0;
    bool misaligned = false;
    double score = 0.0;
    double radial = 0.0;
    Complex root;
};

bool hypothesis_order(const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.radial != b.radial) return a.radial < b.radial;
    if (a.candidate != b.candidate) return a.candidate < b.candidate;
    return a.shift < b.shift;
}

}  // namespace

MatchOutcome match_roots(const std::vector<RootFinding>& findings,
                         const SteeringAssignment& assignment, std::size_t k_hat, bool factor2,
                         const MatchOptions& options) {
    double delta_angle = options.delta_angle;
    if (delta_angle <= 0.0) {
        delta_angle = assignment.min_spacing() / 2.0;
        if (!std::isfinite(delta_angle)) delta_angle = std::numbers::pi / 2.0;
    }

    // Best hit per (candidate, shift). Roots come in conjugate-reciprocal
    // pairs, so near-duplicates at one shift collapse here.
    std::map<std::size_t, std::map<std::size_t, CandidateHit>> detections;
    for (const auto& finding : findings) {
        for (const auto& z : finding.roots) {
            const double radial = std::abs(std::abs(z) - 1.0);
            if (radial >= options.delta_radial) continue;

            std::size_t candidate;
            double angular;
            if (finding.family) {
                candidate = *finding.family;
                angular = angular_distance(std::arg(z), assignment.angles.at(candidate));
            } else {
                candidate = nearest_candidate(assignment, std::arg(z), &angular);
            }
            if (angular >= delta_angle) continue;

            CandidateHit hit{candidate, z, radial, angular};
            auto& slot = detections[candidate];
            auto it = slot.find(finding.shift);
            if (it == slot.end() || hit.score() < it->second.score() ||
                (hit.score() == it->second.score() && hit.radial < it->second.radial)) {
                slot[finding.shift] = hit;
            }
        }
    }

    MatchOutcome outcome;

    // One entity per candidate: an aligned reading at its best shift, plus a
    // two-column misaligned reading when the candidate shows up in two
    // consecutive shift sets. Under factor-2 weighting the pair signature
    // normally comes from a real misaligned transmitter, so that reading is
    // preferred. Without the weighting the signature is two-faced: a vanished
    // noise-subspace row makes the neighboring probes share every root, so an
    // aligned start duplicates exactly like a misaligned one.
    struct Entity {
        Hypothesis single;
        std::optional<Hypothesis> pair;
    };
    std::vector<Entity> entities;
    for (const auto& [candidate, hits] : detections) {
        Entity e;
        std::optional<Hypothesis> single_best;
        for (const auto& [shift, hit] : hits) {
            Hypothesis h{candidate, shift, false, hit.score(), hit.radial, hit.root};
            if (!single_best || hypothesis_order(h, *single_best)) single_best = h;
        }
        e.single = *single_best;
        for (const auto& [shift, hit] : hits) {
            auto next = hits.find(shift + 1);
            if (next == hits.end()) continue;
            Hypothesis h{candidate, shift, true,
                         (hit.score() + next->second.score()) / 2.0,
                         std::min(hit.radial, next->second.radial), hit.root};
            if (!e.pair || hypothesis_order(h, *e.pair)) e.pair = h;
        }
        entities.push_back(std::move(e));
    }

    auto emit = [&](const Hypothesis& h) {
        TransmitterMatch match;
        match.id = h.candidate;
        match.root = assignment.roots.at(h.candidate);  // reconstruct from the dictionary
        match.arrival_shift = h.shift;
        match.misaligned = h.misaligned;
        match.score = h.score;
        outcome.matches.push_back(std::move(match));
    };

    if (factor2) {
        // A crowded probe can throw a spurious root into the angular window
        // of a candidate that is genuinely present one shift earlier, faking
        // the second hit of a pair. True pairs sum to exactly k_hat, so the
        // fake shows up as column overflow; the entity then falls back to
        // its aligned reading instead of being dropped.
        std::sort(entities.begin(), entities.end(), [](const Entity& a, const Entity& b) {
            return hypothesis_order(a.pair ? *a.pair : a.single, b.pair ? *b.pair : b.single);
        });

        std::size_t columns = 0;
        for (const auto& e : entities) {
            const Hypothesis& preferred = e.pair ? *e.pair : e.single;
            const std::size_t width = preferred.misaligned ? 2 : 1;
            if (columns + width <= k_hat) {
                emit(preferred);
                columns += width;
            } else if (e.pair && columns + 1 <= k_hat) {
                emit(e.single);
                columns += 1;
            }
            if (columns == k_hat) break;
        }
        if (columns != k_hat) {
            outcome.status = DecodeStatus::IdentificationFailure;
            std::ostringstream msg;
            msg << "matched " << columns << " of " << k_hat << " steering columns";
            outcome.message = msg.str();
        }
        return outcome;
    }

    // Without factor-2 the readings are settled by column accounting: keep
    // the largest best-scoring selection whose readings can cover exactly
    // k_hat columns. When the deficit forces every pair-capable entity up to
    // two columns (or none of them), the reading is determined; a deficit
    // strictly in between is the real aligned/misaligned confusion and is
    // reported instead of guessed at.
    std::sort(entities.begin(), entities.end(),
              [](const Entity& a, const Entity& b) { return hypothesis_order(a.single, b.single); });

    const std::size_t selectable = std::min(entities.size(), k_hat);
    bool feasible = false;
    std::size_t chosen = 0;
    std::size_t upgrades = 0;
    for (std::size_t m = selectable;; --m) {
        std::size_t pairable = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (entities[i].pair) ++pairable;
        if (k_hat - m <= pairable) {
            feasible = true;
            chosen = m;
            upgrades = k_hat - m;
            break;
        }
        if (m == 0) break;
    }

    if (!feasible) {
        std::size_t max_columns = 0;
        for (const auto& e : entities) max_columns += e.pair ? 2 : 1;
        outcome.status = DecodeStatus::IdentificationFailure;
        std::ostringstream msg;
        msg << "matched " << std::min(max_columns, k_hat) << " of " << k_hat
            << " steering columns";
        outcome.message = msg.str();
        return outcome;
    }

    std::size_t pairable_chosen = 0;
    for (std::size_t i = 0; i < chosen; ++i)
        if (entities[i].pair) ++pairable_chosen;

    if (upgrades > 0 && upgrades < pairable_chosen) {
        outcome.status = DecodeStatus::AmbiguousDuplicates;
        std::ostringstream msg;
        msg << "duplicate roots in consecutive shift sets without factor-2 weighting;"
            << " cannot separate aligned from misaligned starts";
        outcome.message = msg.str();
        std::vector<Hypothesis> determined;
        for (std::size_t i = 0; i < chosen; ++i) {
            const Entity& e = entities[i];
            if (!e.pair) {
                determined.push_back(e.single);
                continue;
            }
            auto label = [&](const char* kind, std::size_t at) {
                std::ostringstream h;
                h << "candidate " << e.pair->candidate << " " << kind << " at shift " << at;
                return h.str();
            };
            outcome.hypotheses.push_back(label("misaligned", e.pair->shift));
            outcome.hypotheses.push_back(label("aligned", e.pair->shift));
            outcome.hypotheses.push_back(label("aligned", e.pair->shift + 1));
        }
        std::sort(determined.begin(), determined.end(), hypothesis_order);
        for (const auto& h : determined) emit(h);  // best-effort partial list
        return outcome;
    }

    std::vector<Hypothesis> readings;
    for (std::size_t i = 0; i < chosen; ++i)
        readings.push_back(upgrades > 0 && entities[i].pair ? *entities[i].pair
                                                            : entities[i].single);
    std::sort(readings.begin(), readings.end(), hypothesis_order);
    for (const auto& h : readings) emit(h);
    return outcome;
}

CMatrix build_steering_matrix(const std::vector<TransmitterMatch>& matches, std::size_t n_rows,
                              bool factor2,
                              const std::map<std::size_t, std::vector<Complex>>* fading_table) {
    if (matches.empty())
        throw std::invalid_argument("build_steering_matrix: no matches");

    std::size_t columns = 0;
    for (const auto& m : matches) columns += m.misaligned ? 2 : 1;

    CMatrix w(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(columns));
    Eigen::Index col = 0;
    for (const auto& m : matches) {
        const std::size_t last_shift = m.arrival_shift + (m.misaligned ? 1 : 0);
        if (last_shift > n_rows - 1)
            throw std::invalid_argument("build_steering_matrix: shift exceeds row count");

        std::vector<Complex> base(n_rows);
        for (std::size_t n = 0; n < n_rows; ++n) base[n] = unit_power(m.root, n);
        if (factor2) base = apply_factor2(base);

        const std::vector<Complex>* gains = nullptr;
        if (fading_table) {
            auto it = fading_table->find(m.id);
            if (it == fading_table->end() || it->second.size() < n_rows)
                throw std::invalid_argument("build_steering_matrix: missing fading sequence");
            gains = &it->second;
        }

        for (std::size_t d = m.arrival_shift; d <= last_shift; ++d) {
            auto column = shift(base, static_cast<std::ptrdiff_t>(d));
            for (std::size_t n = 0; n < n_rows; ++n) {
                Complex v = column[n];
                if (gains) v *= (*gains)[n];
                w(static_cast<Eigen::Index>(n), col) = v;
            }
            ++col;
        }
    }
    return w;
}

GainEstimate estimate_static_gains(const CMatrix& rows,
                                   const std::vector<std::vector<Complex>>& preambles) {
    if (static_cast<std::size_t>(rows.rows()) != preambles.size())
        throw std::invalid_argument("estimate_static_gains: one preamble per row required");

    GainEstimate estimate;
    estimate.cleaned = rows;
    estimate.gains.reserve(preambles.size());

    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const auto& pre = preambles[static_cast<std::size_t>(i)];
        if (pre.empty() || pre.size() > static_cast<std::size_t>(rows.cols()))
            throw std::invalid_argument("estimate_static_gains: bad preamble length");

        Complex num{0.0, 0.0};
        double den = 0.0;
        for (std::size_t l = 0; l < pre.size(); ++l) {
            num += std::conj(pre[l]) * rows(i, static_cast<Eigen::Index>(l));
            den += std::norm(pre[l]);
        }
        if (den == 0.0)
            throw std::invalid_argument("estimate_static_gains: preamble has no energy");

        const Complex q = num / den;
        if (std::abs(q) < 1e-9)
            throw VanishingGainError("estimate_static_gains: estimated gain vanishes");
        estimate.gains.push_back(q);
        estimate.cleaned.row(i) /= q;
    }
    return estimate;
}

namespace {

// Offset estimate for a misaligned column pair: the p in [1, P) whose
// recombination shift(a, -p) + shift(b, P-p) best reproduces the known packet
// head. In gain modes the comparison is the angle to the preamble, which is
// blind to the unknown gain without rewarding empty windows.
struct Recombined {
    std::size_t offset = 0;
    std::vector<Complex> packet;
};

Recombined recombine_offset_pair(std::span<const Complex> row_a, std::span<const Complex> row_b,
                                 std::span<const Complex> preamble, bool fit_gain) {
    const auto p_len = static_cast<std::ptrdiff_t>(row_a.size());
    Recombined best;
    double best_mismatch = std::numeric_limits<double>::infinity();

    for (std::ptrdiff_t p = 1; p < p_len; ++p) {
        const auto head = shift(row_a, -p);
        const auto tail = shift(row_b, p_len - p);
        std::vector<Complex> packet(row_a.size());
        for (std::size_t j = 0; j < packet.size(); ++j) packet[j] = head[j] + tail[j];

        Complex q{1.0, 0.0};
        if (fit_gain) {
            Complex num{0.0, 0.0};
            double den = 0.0;
            for (std::size_t l = 0; l < preamble.size(); ++l) {
                num += std::conj(preamble[l]) * packet[l];
                den += std::norm(preamble[l]);
            }
            if (den > 0.0) q = num / den;
        }

        double mismatch = 0.0;
        for (std::size_t l = 0; l < preamble.size(); ++l)
            mismatch += std::norm(packet[l] - q * preamble[l]);
        if (fit_gain) {
            // With the gain fitted the residual is scale-blind, and a window
            // the slivers leave empty scores a perfect zero (q = 0). Compare
            // angles instead: residual relative to window energy, no window,
            // no evidence.
            double wnorm = 0.0;
            for (std::size_t l = 0; l < preamble.size(); ++l) wnorm += std::norm(packet[l]);
            if (wnorm == 0.0) continue;
            mismatch /= wnorm;
        }

        if (mismatch < best_mismatch) {
            best_mismatch = mismatch;
            best.offset = static_cast<std::size_t>(p);
            best.packet = std::move(packet);
        }
    }
    return best;
}

}  // namespace

DecodeResult full_decode(const ReceivedMatrix& y, const SteeringAssignment& assignment,
                         const DecodeParams& params) {
    const std::size_t n = y.rows();
    if (n < 2) throw std::invalid_argument("full_decode: need at least two slots");

    const bool factor2 = params.factor2.value_or(mode_uses_factor2(params.mode));
    const CMatrix mat = y.view();

    DecodeResult result;
    result.n_used = n;
    result.diagnostics.singular_values = singular_values_of(mat);
    const std::size_t k_hat =
        singular_value_threshold(result.diagnostics.singular_values, params.sigma2, y.cols(),
                                 params.alpha);
    result.diagnostics.k_hat = k_hat;
    if (k_hat > 0 && k_hat < n) {
        const double next = result.diagnostics.singular_values(static_cast<Eigen::Index>(k_hat));
        result.diagnostics.singular_gap =
            next > 0.0 ? result.diagnostics.singular_values(static_cast<Eigen::Index>(k_hat) - 1) / next
                       : std::numeric_limits<double>::infinity();
    }

    if (k_hat == 0) {
        result.status = DecodeStatus::IdentificationFailure;
        result.message = "no singular value above the noise floor";
        return result;
    }
    if (k_hat >= n) {
        result.status = DecodeStatus::IdentificationFailure;
        result.message = "rank not saturated: no noise subspace to probe";
        return result;
    }

    const SubspaceSplit split = svd_split(mat, k_hat);

    // Everyone starts at slot 1 in AlignedT0, so only shift 0 is probed there;
    // the staggered modes probe every admissible shift.
    const std::size_t max_shift = params.mode == ScenarioMode::AlignedT0 ? 0 : n - 2;

    std::vector<RootFinding> findings;
    auto probe = [&](std::size_t d, std::optional<std::size_t> family,
                     std::span<const Complex> h) {
        RootFinding finding;
        finding.shift = d;
        finding.family = family;
        try {
            finding.roots = solve_polynomial(music_polynomial(split.noise_basis, d, factor2, h));
        } catch (const DegeneratePolynomialError&) {
            // A probe with no usable coefficients (possible in heavy noise or
            // at the last shifts) simply contributes no candidates.
        }
        findings.push_back(std::move(finding));
    };

    if (params.mode == ScenarioMode::Fading) {
        for (const auto& [id, h] : params.fading) {
            if (h.size() < n)
                throw std::invalid_argument("full_decode: fading sequence shorter than N");
            for (std::size_t d = 0; d <= max_shift; ++d) probe(d, id, h);
        }
    } else {
        for (std::size_t d = 0; d <= max_shift; ++d) probe(d, std::nullopt, {});
    }

    MatchOutcome matched = match_roots(findings, assignment, k_hat, factor2, params.match);
    if (matched.status != DecodeStatus::Ok) {
        result.status = matched.status;
        result.matches = std::move(matched.matches);
        result.message = std::move(matched.message);
        result.hypotheses = std::move(matched.hypotheses);
        return result;
    }

    DecodeResult decoded = decode_with_matches(y, std::move(matched.matches), params);
    decoded.diagnostics.singular_values = std::move(result.diagnostics.singular_values);
    decoded.diagnostics.k_hat = result.diagnostics.k_hat;
    decoded.diagnostics.singular_gap = result.diagnostics.singular_gap;
    return decoded;
}

DecodeResult decode_with_matches(const ReceivedMatrix& y, std::vector<TransmitterMatch> matches,
                                 const DecodeParams& params) {
    const std::size_t n = y.rows();
    const bool factor2 = params.factor2.value_or(mode_uses_factor2(params.mode));
    const bool gain_modes =
        params.mode == ScenarioMode::StaticGain || params.mode == ScenarioMode::Fading;
    const CMatrix mat = y.view();

    DecodeResult result;
    result.n_used = n;
    result.matches = std::move(matches);

    const auto* fading_table = params.mode == ScenarioMode::Fading ? &params.fading : nullptr;
    result.steering_matrix = build_steering_matrix(result.matches, n, factor2, fading_table);
    try {
        result.packets = decode_packets(result.steering_matrix, mat);
    } catch (const SingularSystemError& err) {
        result.status = DecodeStatus::IdentificationFailure;
        result.message = err.what();
        return result;
    }
    result.diagnostics.residual_norm =
        (mat - result.steering_matrix * result.packets).norm();

    // Per-transmitter cleanup. Misaligned pairs are recombined into one packet
    // first; static gains are then estimated and divided out in one pass.
    CMatrix recovered(static_cast<Eigen::Index>(result.matches.size()),
                      static_cast<Eigen::Index>(y.cols()));
    std::vector<std::vector<Complex>> preambles_by_match;
    Eigen::Index raw_row = 0;
    for (std::size_t i = 0; i < result.matches.size(); ++i) {
        auto& match = result.matches[i];
        const bool needs_preamble = match.misaligned || gain_modes;
        std::span<const Complex> pre;
        if (needs_preamble) {
            auto it = params.preambles.find(match.id);
            if (it == params.preambles.end())
                throw std::invalid_argument("decode: no preamble known for matched id " +
                                            std::to_string(match.id));
            pre = it->second;
            preambles_by_match.push_back(it->second);
        } else {
            preambles_by_match.emplace_back();
        }

        if (match.misaligned) {
            std::vector<Complex> row_a(y.cols()), row_b(y.cols());
            for (Eigen::Index j = 0; j < result.packets.cols(); ++j) {
                row_a[static_cast<std::size_t>(j)] = result.packets(raw_row, j);
                row_b[static_cast<std::size_t>(j)] = result.packets(raw_row + 1, j);
            }
            raw_row += 2;
            Recombined rec = recombine_offset_pair(row_a, row_b, pre, gain_modes);
            match.symbol_offset = rec.offset;
            for (std::size_t j = 0; j < rec.packet.size(); ++j)
                recovered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    rec.packet[j];
        } else {
            recovered.row(static_cast<Eigen::Index>(i)) = result.packets.row(raw_row);
            raw_row += 1;
        }
    }

    if (gain_modes) {
        const GainEstimate estimate = estimate_static_gains(recovered, preambles_by_match);
        for (std::size_t i = 0; i < result.matches.size(); ++i)
            result.matches[i].gain_estimate = estimate.gains[i];
        recovered = estimate.cleaned;
    }

    for (std::size_t i = 0; i < result.matches.size(); ++i) {
        auto& packet = result.matches[i].packet;
        packet.resize(y.cols());
        for (std::size_t j = 0; j < packet.size(); ++j)
            packet[j] = recovered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return result;
}

}  // namespace steermux
