#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steermux/algebra.hpp"
#include "steermux/assignment.hpp"
#include "steermux/scenario.hpp"
#include "steermux/types.hpp"

namespace steermux {

// Number of singular values above the noise floor tau = alpha * sqrt(sigma2 * P).
// With sigma2 = 0 the floor degenerates to a pure round-off guard,
// 1e-9 * max(largest value, 1).
std::size_t singular_value_threshold(const RVector& values_descending, double sigma2,
                                     std::size_t symbols_per_slot, double alpha = 3.0);

struct StopDecision {
    bool stop = false;
    std::size_t k_hat = 0;
};

// Receiver stopping rule: stop once the rank estimate has saturated
// (k_hat < n) and extra_slots rows beyond k_hat have been collected, i.e.
// n >= k_hat + extra_slots. A late arrival that bumps k_hat during the
// extension falsifies the inequality again, which restarts the extension.
StopDecision rank_stop_rule(const ReceivedMatrix& y, double sigma2, std::size_t extra_slots,
                            double alpha = 3.0);

// Coefficients (ascending powers) of z^(L-1) * J(z), where
//   J(z) = w'(z)^H (U_perp U_perp^H) w'(z)
// restricted to rows d..N-1, L = N - d, and w'(z) is the probe
// [1, z, z^2, ...] weighted like the transmissions it is probing for: entry
// at block position m (1-based) doubled for even m when factor2 is on, and
// every entry scaled by the candidate's channel gain of its absolute slot
// when a fading sequence is supplied. Conjugates of z are replaced by 1/z,
// valid on the unit circle where the roots of interest live.
std::vector<Complex> music_polynomial(const CMatrix& noise_basis, std::size_t shift_d,
                                      bool factor2, std::span<const Complex> fading = {});

struct DegeneratePolynomialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All roots (with multiplicity) via the balanced companion matrix. Leading
// coefficients within 1e-14 of the largest magnitude are trimmed first.
// For self-inversive coefficient sequences (c_i = conj(c_{deg-i}), the shape
// every music_polynomial has), near-unit-circle roots are additionally
// averaged with their conjugate-reciprocal partner: a unit root of such a
// polynomial is a tangential double zero, and the pair mean cancels the
// O(sqrt(eps)) split that eigenvalue solvers leave on double roots.
std::vector<Complex> solve_polynomial(std::span<const Complex> coefficients);

// ||U_perp^H w'(z)||^2, the quadratic form music_polynomial encodes, evaluated
// directly. Used as an independent check and for diagnostics; exact zeros of
// this form are the transmitter roots.
double evaluate_music(const CMatrix& noise_basis, std::size_t shift_d, bool factor2,
                      std::span<const Complex> fading, Complex z);

struct CandidateHit {
    std::size_t candidate = 0;
    Complex root;
    double radial = 0.0;   // | |root| - 1 |
    double angular = 0.0;  // circular distance to the candidate angle
    double score() const { return radial + angular; }
};

struct RootFinding {
    std::size_t shift = 0;
    // Candidate family this finding belongs to (fading mode only): the probe
    // was scaled with that candidate's channel gains, so only that candidate
    // may be matched from it.
    std::optional<std::size_t> family;
    std::vector<Complex> roots;
    std::vector<CandidateHit> unit_candidates;
};

struct TransmitterMatch {
    std::size_t id = 0;
    Complex root;
    std::size_t arrival_shift = 0;  // 0-based: arrival slot - 1
    bool misaligned = false;        // occupies columns at arrival_shift and arrival_shift+1
    double score = 0.0;
    Complex gain_estimate{1.0, 0.0};
    std::size_t symbol_offset = 0;   // estimated p for misaligned matches
    std::vector<Complex> packet;     // recovered packet, post recombination/cleanup
};

enum class DecodeStatus {
    Ok,
    IdentificationFailure,  // matches cannot account for k_hat columns
    AmbiguousDuplicates,    // duplicate roots without factor-2 weighting
};

struct MatchOptions {
    double delta_radial = 0.05;
    // <= 0 selects the default, half the minimum candidate spacing.
    double delta_angle = 0.0;
};

struct MatchOutcome {
    DecodeStatus status = DecodeStatus::Ok;
    std::vector<TransmitterMatch> matches;  // best-effort partial list on failure
    std::string message;
    // On AmbiguousDuplicates: the equally plausible readings of the duplicated
    // candidates, e.g. "candidate 7 aligned at shift 2" vs "... misaligned at 2".
    std::vector<std::string> hypotheses;
};

// Greedy root-to-transmitter matching. Roots are mapped to the nearest
// candidate angle (radial filter first), scored by radial + angular distance,
// and selected best-first under two constraints: one match per candidate, and
// the selected matches must account for exactly k_hat steering columns.
// A candidate found in two consecutive shift sets is a misaligned transmitter
// when factor-2 weighting was active; if that pair reading would overflow the
// column budget the second hit is spurious and the aligned reading is kept.
// Without the weighting the duplicate is two-faced (aligned starts can echo
// into the neighboring shift set), so the column accounting picks the
// reading: only when it would accept some duplicates as misaligned and others
// as aligned is the ambiguity real, and then it is reported rather than
// guessed at.
MatchOutcome match_roots(const std::vector<RootFinding>& findings,
                         const SteeringAssignment& assignment, std::size_t k_hat, bool factor2,
                         const MatchOptions& options = {});

// Steering matrix for a match list: per aligned match one column
// shift(w, arrival_shift), per misaligned match the column pair at
// arrival_shift and arrival_shift+1. The factor-2 weighting is applied to the
// unshifted vector before shifting; fading scales absolute rows.
CMatrix build_steering_matrix(const std::vector<TransmitterMatch>& matches, std::size_t n_rows,
                              bool factor2,
                              const std::map<std::size_t, std::vector<Complex>>* fading_table = nullptr);

// Least-squares packet recovery; thin alias kept separate from the algebra
// primitive so decode call sites read as pipeline stages.
inline CMatrix decode_packets(const CMatrix& steering, const CMatrix& y) {
    return least_squares_decode(steering, y);
}

struct VanishingGainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GainEstimate {
    std::vector<Complex> gains;
    CMatrix cleaned;  // rows divided by their estimated gain
};

// Per-row static gain from the known preamble: q = <pre, row_head> / <pre, pre>.
// Rows whose estimate has magnitude below 1e-9 cannot be normalized and raise
// VanishingGainError.
GainEstimate estimate_static_gains(const CMatrix& rows,
                                   const std::vector<std::vector<Complex>>& preambles);

struct DecodeDiagnostics {
    RVector singular_values;
    std::size_t k_hat = 0;
    double residual_norm = 0.0;  // ||Y - W * S_hat||_F
    double singular_gap = 0.0;   // value k_hat / value k_hat+1 (inf when clean)
};

struct DecodeResult {
    DecodeStatus status = DecodeStatus::Ok;
    std::vector<TransmitterMatch> matches;
    CMatrix steering_matrix;  // N x (accounted columns)
    CMatrix packets;          // raw least-squares rows, one per steering column
    std::size_t n_used = 0;
    DecodeDiagnostics diagnostics;
    std::string message;
    std::vector<std::string> hypotheses;

    bool ok() const { return status == DecodeStatus::Ok; }
};

struct DecodeParams {
    double sigma2 = 0.0;
    ScenarioMode mode = ScenarioMode::AlignedT0;
    // Unset: follow the mode (factor-2 on from Misaligned upward).
    std::optional<bool> factor2;
    double alpha = 3.0;
    MatchOptions match;
    std::size_t extra_slots = 0;  // diagnostics only; collection already happened
    std::size_t preamble_len = 4;
    // Known packet heads, id -> first preamble_len symbols. Required for
    // misalignment estimation and gain estimation (Misaligned and up).
    std::map<std::size_t, std::vector<Complex>> preambles;
    // Known channel gains, id -> h(slot 1..N). In fading mode each entry forms
    // its own equation-set family and a candidate is only accepted from its own.
    std::map<std::size_t, std::vector<Complex>> fading;
};

// Full receiver pipeline on a collected matrix: threshold -> subspace split ->
// per-shift root extraction -> matching -> steering matrix -> least squares ->
// per-mode cleanup (offset recombination, gain normalization).
DecodeResult full_decode(const ReceivedMatrix& y, const SteeringAssignment& assignment,
                         const DecodeParams& params);

// The back half of full_decode with the identification step skipped: decode
// against a caller-supplied match list (id/shift/misalignment taken as given).
// This is the known-transmitters regime used for pure symbol-error
// measurements.
DecodeResult decode_with_matches(const ReceivedMatrix& y, std::vector<TransmitterMatch> matches,
                                 const DecodeParams& params);

}  // namespace steermux
