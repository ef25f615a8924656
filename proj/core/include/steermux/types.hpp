#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace steermux {

using Complex = std::complex<double>;

// Slots index rows, symbols index columns; storage is row-major so a slot is
// contiguous in memory and maps 1:1 onto the replay file layout.
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Received matrix Y: one row appended per observed slot, P symbols per row.
class ReceivedMatrix {
public:
    explicit ReceivedMatrix(std::size_t symbols_per_slot) : cols_(symbols_per_slot) {
        if (cols_ == 0)
            throw std::invalid_argument("ReceivedMatrix: symbols_per_slot must be positive");
    }

    ReceivedMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
        : cols_(cols), data_(std::move(data)) {
        if (cols_ == 0 || data_.size() != rows * cols)
            throw std::invalid_argument("ReceivedMatrix: shape does not match payload");
    }

    void push_row(std::span<const Complex> row) {
        if (row.size() != cols_)
            throw std::invalid_argument("ReceivedMatrix: row length != symbols_per_slot");
        data_.insert(data_.end(), row.begin(), row.end());
    }

    std::size_t rows() const { return cols_ ? data_.size() / cols_ : 0; }
    std::size_t cols() const { return cols_; }
    const std::vector<Complex>& data() const { return data_; }

    Complex at(std::size_t row, std::size_t col) const { return data_[row * cols_ + col]; }

    Eigen::Map<const CMatrix> view() const {
        return Eigen::Map<const CMatrix>(data_.data(), static_cast<Eigen::Index>(rows()),
                                         static_cast<Eigen::Index>(cols_));
    }

private:
    std::size_t cols_;
    std::vector<Complex> data_;
};

}  // namespace steermux
