#include "steermux/replay.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace steermux {

namespace {

void put_u64(std::ostream& os, std::uint64_t value) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    os.write(bytes, 8);
}

void put_f64(std::ostream& os, double value) {
    put_u64(os, std::bit_cast<std::uint64_t>(value));
}

bool get_u64(std::istream& is, std::uint64_t& value) {
    char bytes[8];
    if (!is.read(bytes, 8)) return false;
    value = 0;
    for (int i = 0; i < 8; ++i)
        value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    return true;
}

bool get_f64(std::istream& is, double& value) {
    std::uint64_t bits = 0;
    if (!get_u64(is, bits)) return false;
    value = std::bit_cast<double>(bits);
    return true;
}

// Counts above this are certainly corruption, not data; refuse before trying
// to allocate N*P samples.
constexpr std::uint64_t kMaxDim = 1u << 20;

}  // namespace

void write_matrix(const ReceivedMatrix& matrix, std::ostream& os) {
    put_u64(os, matrix.rows());
    put_u64(os, matrix.cols());
    for (Complex sample : matrix.data()) {
        put_f64(os, sample.real());
        put_f64(os, sample.imag());
    }
    if (!os) throw FormatError("matrix write failed");
}

ReceivedMatrix read_matrix(std::istream& is) {
    std::uint64_t n = 0, p = 0;
    if (!get_u64(is, n) || !get_u64(is, p)) throw FormatError("matrix header truncated");
    if (n == 0 || p == 0 || n > kMaxDim || p > kMaxDim)
        throw FormatError("matrix header has impossible dimensions");

    std::vector<Complex> data;
    data.reserve(static_cast<std::size_t>(n * p));
    for (std::uint64_t i = 0; i < n * p; ++i) {
        double re = 0.0, im = 0.0;
        if (!get_f64(is, re) || !get_f64(is, im))
            throw FormatError("matrix body truncated at sample " + std::to_string(i));
        data.emplace_back(re, im);
    }
    if (is.peek() != std::char_traits<char>::eof())
        throw FormatError("trailing bytes after matrix body");
    return ReceivedMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(p),
                          std::move(data));
}

void save_matrix(const ReceivedMatrix& matrix, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_matrix(matrix, os);
}

ReceivedMatrix load_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    return read_matrix(is);
}

}  // namespace steermux
