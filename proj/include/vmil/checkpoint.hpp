#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "vmil/model.hpp"
#include "vmil/types.hpp"

namespace vmil {

// Single-file checkpoint container (little-endian):
//   bytes 0..7  magic "VMILCKP1"
//   u32 version (1)
//   u64 len + bytes   config snapshot (JSON text)
//   u64 epoch of the stored parameters
//   f64 validation loss at that epoch
//   u64 len + bytes   training RNG state capture
//   u64 tensor count, then per tensor:
//     u64 len + bytes name, u64 rows, u64 cols, rows*cols f64 row-major
struct Checkpoint {
    std::string config_json;
    std::uint64_t epoch = 0;
    double val_loss = 0.0;
    std::string rng_state;
    std::vector<std::pair<std::string, Matrix>> tensors;
};

inline constexpr char kCheckpointMagic[8] = {'V', 'M', 'I', 'L', 'C', 'K', 'P', '1'};

namespace detail {
inline void write_u32(std::ofstream& o, std::uint32_t v) { o.write(reinterpret_cast<const char*>(&v), 4); }
inline void write_u64(std::ofstream& o, std::uint64_t v) { o.write(reinterpret_cast<const char*>(&v), 8); }
inline void write_f64(std::ofstream& o, double v) { o.write(reinterpret_cast<const char*>(&v), 8); }
inline void write_str(std::ofstream& o, const std::string& s) {
    write_u64(o, s.size());
    o.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::uint32_t read_u32(std::ifstream& i) {
    std::uint32_t v;
    i.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
inline std::uint64_t read_u64(std::ifstream& i) {
    std::uint64_t v;
    i.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
inline double read_f64(std::ifstream& i) {
    double v;
    i.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
inline std::string read_str(std::ifstream& i) {
    std::string s(read_u64(i), '\0');
    i.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
}
}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    out.write(kCheckpointMagic, 8);
    detail::write_u32(out, 1);
    detail::write_str(out, ckpt.config_json);
    detail::write_u64(out, ckpt.epoch);
    detail::write_f64(out, ckpt.val_loss);
    detail::write_str(out, ckpt.rng_state);
    detail::write_u64(out, ckpt.tensors.size());
    for (const auto& [name, m] : ckpt.tensors) {
        detail::write_str(out, name);
        detail::write_u64(out, static_cast<std::uint64_t>(m.rows()));
        detail::write_u64(out, static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) detail::write_f64(out, m(r, c));
    }
    if (!out) throw RuntimeAbort("short write: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeAbort("cannot open: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw RuntimeAbort("not a vmil checkpoint: " + path);
    const auto version = detail::read_u32(in);
    if (version != 1) throw RuntimeAbort("unsupported checkpoint version in " + path);
    Checkpoint ckpt;
    ckpt.config_json = detail::read_str(in);
    ckpt.epoch = detail::read_u64(in);
    ckpt.val_loss = detail::read_f64(in);
    ckpt.rng_state = detail::read_str(in);
    const auto count = detail::read_u64(in);
    for (std::uint64_t t = 0; t < count; ++t) {
        std::string name = detail::read_str(in);
        const auto rows = detail::read_u64(in);
        const auto cols = detail::read_u64(in);
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = detail::read_f64(in);
        ckpt.tensors.emplace_back(std::move(name), std::move(m));
    }
    if (!in) throw RuntimeAbort("truncated checkpoint: " + path);
    return ckpt;
}

inline Checkpoint snapshot_params(ModelParams& params) {
    Checkpoint ckpt;
    for (const auto& ref : tensor_refs(params))
        ckpt.tensors.emplace_back(ref.name, Eigen::Map<const Matrix>(ref.data, ref.rows, ref.cols));
    return ckpt;
}

inline void restore_params(const Checkpoint& ckpt, ModelParams& params) {
    auto refs = tensor_refs(params);
    require(refs.size() == ckpt.tensors.size(), "checkpoint: tensor count mismatch");
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& [name, m] = ckpt.tensors[i];
        require(refs[i].name == name, "checkpoint: tensor order mismatch at " + name);
        require(refs[i].rows == m.rows() && refs[i].cols == m.cols(),
                "checkpoint: shape mismatch for " + name);
        Eigen::Map<Matrix>(refs[i].data, m.rows(), m.cols()) = m;
    }
}

}  // namespace vmil
