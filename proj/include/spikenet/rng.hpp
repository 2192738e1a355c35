#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace spikenet {

// Named substreams of the single run seed.
enum class Stream : std::uint64_t {
  split = 0x73706c6974ULL,
  init = 0x696e6974ULL,
  sampler = 0x73616d706cULL,
  synth = 0x73796e7468ULL,
  shuffle = 0x73687566ULL,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based seed derivation: the same (seed, keys...) always yields the
// same substream, independent of the order in which substreams are created.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream s,
                                           std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = mix64(seed ^ static_cast<std::uint64_t>(s));
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// SplitMix64 engine; cheap to seed, so one engine per (root, step) is fine.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace spikenet
