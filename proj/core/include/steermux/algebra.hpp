#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "steermux/types.hpp"

namespace steermux {

// Slot-shift operator. d > 0 prepends d zeros and drops the last d entries,
// d < 0 drops the first |d| entries and appends |d| zeros, d = 0 is identity.
// The result always has the input's length.
std::vector<Complex> shift(std::span<const Complex> v, std::ptrdiff_t d);

// root^exponent for a unit-magnitude root, computed in polar form so long
// powers do not accumulate drift. Shared by the simulator and the decoder so
// both sides agree bit-for-bit on transmission coefficients.
Complex unit_power(Complex root, std::size_t exponent);

struct SteeringVector {
    Complex root;
    std::size_t length = 0;
    std::size_t shift = 0;
    std::vector<Complex> entries;
};

// w = shift([root^0, root^1, ..., root^(N-1)], d). Requires |root| = 1
// (within 1e-12) and d <= N-1.
SteeringVector make_steering_vector(Complex root, std::size_t length, std::size_t shift_by = 0);

// Doubles every even 1-based position: [a, b, c, d] -> [a, 2b, c, 2d].
// Operates on positions of the vector it is handed; shifted steering columns
// are built by weighting the unshifted vector first and shifting afterwards.
std::vector<Complex> apply_factor2(std::span<const Complex> v);

struct SubspaceSplit {
    CMatrix signal_basis;     // N x K, left singular vectors of the K largest values
    CMatrix noise_basis;      // N x (N-K), orthogonal complement
    RVector singular_values;  // length N, descending, zero-padded when N > P
    std::size_t retained = 0; // K
};

// Full SVD of Y with the left singular basis partitioned at column k.
// Thin SVD is not enough here: the noise basis spans the entire orthogonal
// complement of the signal columns.
SubspaceSplit svd_split(const CMatrix& y, std::size_t k);

// Descending singular values of y, zero-padded to y.rows() entries.
RVector singular_values_of(const CMatrix& y);

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimum-norm least squares solve of W * S = Y via SVD. Refuses systems with
// condition number above 1e12 instead of silently amplifying noise; normal
// equations would square the condition number, so they are never formed.
CMatrix least_squares_decode(const CMatrix& w, const CMatrix& y);

}  // namespace steermux
