#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "steermux/algebra.hpp"
#include "steermux/rng.hpp"

using namespace steermux;

namespace {

const Complex kI{0.0, 1.0};

std::vector<Complex> vec(std::initializer_list<Complex> values) { return values; }

Complex random_on_circle(RngStream& stream) {
    const double a = std::numbers::pi * stream.next_unit();
    return {std::cos(a), std::sin(a)};
}

CMatrix random_matrix(RngStream& stream, std::size_t rows, std::size_t cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = stream.next_complex_gaussian(1.0);
    return m;
}

// Independent oracle for the noise subspace: orthonormalize the columns of W
// by modified Gram-Schmidt, then sweep the identity columns through the same
// process to extend the basis; whatever survives spans the complement.
CMatrix gram_schmidt_complement(const CMatrix& w) {
    const Eigen::Index n = w.rows();
    std::vector<CVector> basis;
    auto feed = [&](CVector v) {
        for (const auto& b : basis) v -= (b.adjoint() * v)(0) * b;
        for (const auto& b : basis) v -= (b.adjoint() * v)(0) * b;  // second pass for stability
        if (v.norm() > 1e-8) basis.push_back(v.normalized());
    };
    for (Eigen::Index j = 0; j < w.cols(); ++j) feed(w.col(j));
    const std::size_t rank = basis.size();
    for (Eigen::Index j = 0; j < n; ++j) feed(CVector::Unit(n, j));
    CMatrix complement(n, static_cast<Eigen::Index>(basis.size() - rank));
    for (std::size_t j = rank; j < basis.size(); ++j)
        complement.col(static_cast<Eigen::Index>(j - rank)) = basis[j];
    return complement;
}

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace

TEST_CASE("shift pads with zeros and preserves length") {
    const auto v = vec({1.0, 2.0, 3.0, 4.0});

    CHECK(shift(v, 0) == v);
    CHECK(shift(v, 1) == vec({0.0, 1.0, 2.0, 3.0}));
    CHECK(shift(v, 3) == vec({0.0, 0.0, 0.0, 1.0}));
    CHECK(shift(v, -1) == vec({2.0, 3.0, 4.0, 0.0}));
    CHECK(shift(v, -3) == vec({4.0, 0.0, 0.0, 0.0}));

    CHECK_THROWS_AS(shift(v, 4), std::invalid_argument);
    CHECK_THROWS_AS(shift(v, -4), std::invalid_argument);
}

TEST_CASE("shift compositions cancel where no entries fell off") {
    const auto padded = vec({1.0, kI, -2.0, 0.0, 0.0});
    CHECK(shift(shift(padded, 2), -2) == padded);  // zero tail, nothing lost
    const auto v = vec({1.0, kI, -2.0, 3.0 * kI, 5.0});
    CHECK(shift(shift(v, 2), -2) != v);            // nonzero tail falls off
    CHECK(shift(shift(v, -2), 2) != v);            // and the head going up
    CHECK(shift(shift(v, 1), 1) == shift(v, 2));   // shifts add up
}

TEST_CASE("unit_power agrees with repeated multiplication") {
    RngStream stream(42, RngRole::Packet);
    for (int rep = 0; rep < 20; ++rep) {
        const Complex r = random_on_circle(stream);
        Complex by_product{1.0, 0.0};
        for (std::size_t e = 0; e < 60; ++e) {
            CHECK(std::abs(unit_power(r, e) - by_product) < 1e-10);
            by_product *= r;
        }
    }
    // i cycles with period 4 and the polar form keeps that exact
    CHECK(std::abs(unit_power(kI, 101) - kI) < 1e-13);
    CHECK(std::abs(unit_power(kI, 102) + 1.0) < 1e-13);
}

TEST_CASE("make_steering_vector lays out shifted root powers") {
    const SteeringVector w = make_steering_vector(kI, 4);
    CHECK(max_abs_diff(w.entries, vec({1.0, kI, -1.0, -kI})) < 1e-15);

    const SteeringVector shifted = make_steering_vector(kI, 4, 2);
    CHECK(max_abs_diff(shifted.entries, vec({0.0, 0.0, 1.0, kI})) < 1e-15);
    CHECK(shifted.shift == 2);

    CHECK_THROWS_AS(make_steering_vector(Complex{2.0, 0.0}, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_steering_vector(kI, 4, 4), std::invalid_argument);
}

TEST_CASE("apply_factor2 doubles even 1-based positions") {
    const auto weighted = apply_factor2(vec({1.0, kI, -1.0, -kI}));
    CHECK(max_abs_diff(weighted, vec({1.0, 2.0 * kI, -1.0, -2.0 * kI})) < 1e-15);

    // Weighting happens before shifting: the doubled entries follow the block,
    // not the absolute row.
    const auto column = shift(weighted, 1);
    CHECK(max_abs_diff(column, vec({0.0, 1.0, 2.0 * kI, -1.0})) < 1e-15);
}

TEST_CASE("svd_split matches a Gram-Schmidt complement oracle") {
    RngStream stream(7, RngRole::Packet);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 6 + static_cast<std::size_t>(rep % 3);
        const std::size_t k = 2 + static_cast<std::size_t>(rep % 3);
        const CMatrix w = random_matrix(stream, n, k);
        const CMatrix y = w * random_matrix(stream, k, 12);  // rank k by construction

        const SubspaceSplit split = svd_split(y, k);
        CHECK(split.retained == k);
        CHECK(split.noise_basis.cols() == static_cast<Eigen::Index>(n - k));

        // noise basis is orthonormal and orthogonal to the data
        const CMatrix gram = split.noise_basis.adjoint() * split.noise_basis;
        CHECK((gram - CMatrix::Identity(gram.rows(), gram.cols())).norm() < 1e-10);
        CHECK((split.noise_basis.adjoint() * w).norm() < 1e-9);

        // and spans exactly the oracle complement (projectors agree)
        const CMatrix oracle = gram_schmidt_complement(w);
        const CMatrix p_split = split.noise_basis * split.noise_basis.adjoint();
        const CMatrix p_oracle = oracle * oracle.adjoint();
        CHECK((p_split - p_oracle).norm() < 1e-8);

        // signal and noise bases together are unitary
        CMatrix full(n, n);
        full << split.signal_basis, split.noise_basis;
        CHECK((full.adjoint() * full - CMatrix::Identity(n, n)).norm() < 1e-10);
    }
}

TEST_CASE("singular values come back descending and zero-padded") {
    RngStream stream(11, RngRole::Packet);
    const CMatrix y = random_matrix(stream, 7, 4);  // more rows than columns

    const RVector values = singular_values_of(y);
    REQUIRE(values.size() == 7);
    for (Eigen::Index i = 1; i < values.size(); ++i) CHECK(values(i) <= values(i - 1));
    for (Eigen::Index i = 4; i < 7; ++i) CHECK(values(i) == 0.0);

    const SubspaceSplit split = svd_split(y, 2);
    CHECK((split.singular_values - values).norm() < 1e-12);
}

TEST_CASE("svd_split rejects k beyond the row count") {
    RngStream stream(13, RngRole::Packet);
    const CMatrix y = random_matrix(stream, 3, 5);
    CHECK_THROWS_AS(svd_split(y, 4), std::invalid_argument);
}

TEST_CASE("least_squares_decode recovers the exact payload") {
    RngStream stream(17, RngRole::Packet);
    const CMatrix w = random_matrix(stream, 8, 3);
    const CMatrix s = random_matrix(stream, 3, 10);
    const CMatrix recovered = least_squares_decode(w, w * s);
    CHECK((recovered - s).norm() < 1e-9);
}

TEST_CASE("least_squares_decode refuses singular systems") {
    CMatrix w(4, 2);
    w.col(0) << 1.0, 2.0, 3.0, 4.0;
    w.col(1) = 2.0 * w.col(0);  // dependent columns
    const CMatrix y = CMatrix::Ones(4, 5);
    CHECK_THROWS_AS(least_squares_decode(w, y), SingularSystemError);
}
