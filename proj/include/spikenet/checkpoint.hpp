#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/net.hpp"

namespace spikenet {

// Binary checkpoint: "SPKN", u32 version, then for every tensor in canonical
// order a u32 rank, rank u32 dims and the row-major values as 32-bit floats.
// All integers and floats little-endian. The tensor list itself is implied by
// the model configuration.
inline constexpr std::array<char, 4> kCheckpointMagic{'S', 'P', 'K', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw FormatError(std::string("checkpoint truncated while reading ") + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, ModelParams<float> params) {
  out.write(kCheckpointMagic.data(), 4);
  detail::put_u32(out, kCheckpointVersion);
  for (auto& ref : params.tensors()) {
    const Matrix<float>& m = *ref.tensor;
    detail::put_u32(out, static_cast<std::uint32_t>(ref.rank));
    if (ref.rank == 2) detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (float v : m.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw InputError("checkpoint write failed");
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(out, params);
}

/// Reads a checkpoint whose tensors must match the shapes implied by `cfg`.
inline ModelParams<float> read_checkpoint(std::istream& in, const ModelConfig& cfg) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kCheckpointMagic)
    throw FormatError("not a checkpoint: bad magic bytes");
  const auto version = detail::get_u32(in, "version");
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  auto params = ModelParams<float>::zeros(cfg);
  for (auto& ref : params.tensors()) {
    Matrix<float>& m = *ref.tensor;
    const auto rank = detail::get_u32(in, "rank");
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = detail::get_u32(in, "dims");
    std::vector<std::uint32_t> expect;
    if (ref.rank == 2) expect.push_back(static_cast<std::uint32_t>(m.rows()));
    expect.push_back(static_cast<std::uint32_t>(m.cols()));
    if (dims != expect) {
      auto show = [](const std::vector<std::uint32_t>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "x" : "") + std::to_string(v[i]);
        return s;
      };
      throw FormatError("dimension mismatch for tensor '" + ref.name + "': checkpoint has " + show(dims) +
                        ", configuration and data imply " + show(expect));
    }
    for (auto& v : m.values()) v = std::bit_cast<float>(detail::get_u32(in, ref.name.c_str()));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after last tensor");
  return params;
}

inline ModelParams<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in, cfg);
}

}  // namespace spikenet
