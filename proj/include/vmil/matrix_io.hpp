#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "vmil/types.hpp"

namespace vmil {

// Dense matrix container, documented byte layout (little-endian):
//   bytes 0..7   magic "VMILMAT1"
//   bytes 8..11  uint32 dtype, 1 = float64
//   bytes 12..19 uint64 rows
//   bytes 20..27 uint64 cols
//   bytes 28..   rows*cols float64, row-major
inline constexpr char kMatrixMagic[8] = {'V', 'M', 'I', 'L', 'M', 'A', 'T', '1'};
inline constexpr std::uint32_t kDtypeFloat64 = 1;

inline void write_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    out.write(kMatrixMagic, 8);
    const std::uint32_t dtype = kDtypeFloat64;
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&dtype), sizeof dtype);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    if (!out) throw RuntimeAbort("short write: " + path);
}

inline Matrix read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeAbort("cannot open: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0)
        throw RuntimeAbort("bad matrix header in " + path);
    std::uint32_t dtype = 0;
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&dtype), sizeof dtype);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in || dtype != kDtypeFloat64)
        throw RuntimeAbort("unsupported matrix dtype in " + path);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            m(r, c) = v;
        }
    if (!in) throw RuntimeAbort("truncated matrix file: " + path);
    return m;
}

}  // namespace vmil
