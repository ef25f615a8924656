#include "steermux/algebra.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdlib>

namespace steermux {

std::vector<Complex> shift(std::span<const Complex> v, std::ptrdiff_t d) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
    if (std::abs(d) >= n && n > 0)
        throw std::invalid_argument("shift: |d| must be at most length-1");
    if (n == 0) throw std::invalid_argument("shift: empty vector");

    std::vector<Complex> out(static_cast<std::size_t>(n), Complex{0.0, 0.0});
    if (d >= 0) {
        for (std::ptrdiff_t i = d; i < n; ++i) out[i] = v[i - d];
    } else {
        for (std::ptrdiff_t i = 0; i < n + d; ++i) out[i] = v[i - d];
    }
    return out;
}

Complex unit_power(Complex root, std::size_t exponent) {
    if (exponent == 0) return {1.0, 0.0};
    double theta = std::arg(root) * static_cast<double>(exponent);
    return {std::cos(theta), std::sin(theta)};
}

SteeringVector make_steering_vector(Complex root, std::size_t length, std::size_t shift_by) {
    if (length == 0) throw std::invalid_argument("make_steering_vector: length must be positive");
    if (std::abs(std::abs(root) - 1.0) > 1e-12)
        throw std::invalid_argument("make_steering_vector: root must lie on the unit circle");
    if (shift_by > length - 1)
        throw std::invalid_argument("make_steering_vector: shift must be at most length-1");

    std::vector<Complex> base(length);
    for (std::size_t n = 0; n < length; ++n) base[n] = unit_power(root, n);

    SteeringVector sv;
    sv.root = root;
    sv.length = length;
    sv.shift = shift_by;
    sv.entries = shift_by == 0 ? std::move(base)
                               : shift(base, static_cast<std::ptrdiff_t>(shift_by));
    return sv;
}

std::vector<Complex> apply_factor2(std::span<const Complex> v) {
    std::vector<Complex> out(v.begin(), v.end());
    // 1-based even positions are the odd 0-based indices.
    for (std::size_t i = 1; i < out.size(); i += 2) out[i] *= 2.0;
    return out;
}

RVector singular_values_of(const CMatrix& y) {
    Eigen::JacobiSVD<CMatrix> svd(y);
    RVector padded = RVector::Zero(y.rows());
    padded.head(svd.singularValues().size()) = svd.singularValues();
    return padded;
}

SubspaceSplit svd_split(const CMatrix& y, std::size_t k) {
    const auto n = static_cast<std::size_t>(y.rows());
    if (k > n) throw std::invalid_argument("svd_split: k exceeds row count");

    Eigen::JacobiSVD<CMatrix> svd(y, Eigen::ComputeFullU);

    SubspaceSplit split;
    split.retained = k;
    split.singular_values = RVector::Zero(y.rows());
    split.singular_values.head(svd.singularValues().size()) = svd.singularValues();
    split.signal_basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(k));
    split.noise_basis = svd.matrixU().rightCols(static_cast<Eigen::Index>(n - k));
    return split;
}

CMatrix least_squares_decode(const CMatrix& w, const CMatrix& y) {
    if (w.rows() != y.rows())
        throw std::invalid_argument("least_squares_decode: row counts differ");
    if (w.cols() == 0) throw std::invalid_argument("least_squares_decode: empty system");

    Eigen::JacobiSVD<CMatrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0 || smax / smin > 1e12)
        throw SingularSystemError("least_squares_decode: steering matrix is numerically singular");

    return svd.solve(y);
}

}  // namespace steermux
