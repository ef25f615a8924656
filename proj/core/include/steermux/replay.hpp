#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "steermux/types.hpp"

namespace steermux {

// Violations of the on-disk matrix layout: truncation, impossible counts,
// trailing garbage.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat little-endian layout for decoder-only replay: two unsigned 64-bit
// counts N and P, then the N*P samples row by row, each an interleaved
// (re, im) pair of IEEE doubles. Byte order is fixed regardless of host.
void write_matrix(const ReceivedMatrix& matrix, std::ostream& os);

ReceivedMatrix read_matrix(std::istream& is);

// Convenience wrappers; throw FormatError when the file cannot be opened.
void save_matrix(const ReceivedMatrix& matrix, const std::string& path);
ReceivedMatrix load_matrix(const std::string& path);

}  // namespace steermux
