#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/matrix.hpp"
#include "spikenet/rng.hpp"

namespace spikenet {

struct BenchConfig {
  std::vector<std::size_t> dims{128, 256, 512};  // square n x n weights
  std::vector<double> densities{0.05, 0.1, 0.2, 0.3, 0.5};
  std::size_t repetitions = 21;
  std::size_t warmup = 3;
  std::size_t inner_loops = 200;  // products per timed repetition
  std::uint64_t seed = 0;

  void validate() const {
    if (dims.empty() || densities.empty()) throw InputError("bench: dims and densities must be non-empty");
    for (auto d : dims)
      if (d == 0) throw InputError("bench: dims must be positive");
    for (auto p : densities)
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("bench: densities must lie in [0, 1]");
    if (repetitions == 0 || inner_loops == 0) throw InputError("bench: repetitions must be positive");
  }
};

struct BenchRow {
  double density = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  double ns_masked = 0.0;  // per product, median over repetitions
  double ns_dense = 0.0;
  bool equivalent = true;

  double speedup() const { return ns_masked > 0.0 ? ns_dense / ns_masked : 0.0; }
};

namespace detail {

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

// Keeps the optimizer from dropping a result.
inline volatile float bench_sink = 0.0f;

inline void consume(const std::vector<float>& v) { bench_sink = bench_sink + (v.empty() ? 0.0f : v.front()); }

}  // namespace detail

/// Times masked_sum against dense_product on random spike vectors. Every
/// repetition draws a fresh spike vector and compares both outputs within
/// 1e-6 (relative to the row-sum magnitude).
inline std::vector<BenchRow> bench_masked_sum(const BenchConfig& cfg) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (std::size_t n : cfg.dims) {
    SplitMix64 wrng(derive_seed(cfg.seed, {0xbe7c, n}));
    Matrix<float> w(n, n);
    for (auto& x : w.values()) x = static_cast<float>(static_cast<double>(wrng() >> 11) * 0x1.0p-53 * 2.0 - 1.0);
    for (double density : cfg.densities) {
      BenchRow row;
      row.density = density;
      row.n = n;
      row.m = n;
      SplitMix64 srng(derive_seed(cfg.seed, {0x5b1e, n, static_cast<std::uint64_t>(std::llround(density * 1e6))}));
      std::vector<double> t_masked, t_dense;
      std::vector<float> spikes(n), out_masked(n), out_dense(n);
      for (std::size_t rep = 0; rep < cfg.warmup + cfg.repetitions; ++rep) {
        for (auto& s : spikes) s = static_cast<double>(srng() >> 11) * 0x1.0p-53 < density ? 1.0f : 0.0f;
        const auto a = clock::now();
        for (std::size_t i = 0; i < cfg.inner_loops; ++i) masked_sum<float>(spikes, w, out_masked);
        const auto b = clock::now();
        for (std::size_t i = 0; i < cfg.inner_loops; ++i) dense_product<float>(spikes, w, out_dense);
        const auto c = clock::now();
        detail::consume(out_masked);
        detail::consume(out_dense);
        for (std::size_t j = 0; j < n; ++j)
          if (std::abs(out_masked[j] - out_dense[j]) > 1e-6f * std::max(1.0f, std::abs(out_dense[j])))
            row.equivalent = false;
        if (rep < cfg.warmup) continue;
        t_masked.push_back(std::chrono::duration<double, std::nano>(b - a).count() / static_cast<double>(cfg.inner_loops));
        t_dense.push_back(std::chrono::duration<double, std::nano>(c - b).count() / static_cast<double>(cfg.inner_loops));
      }
      row.ns_masked = detail::median(t_masked);
      row.ns_dense = detail::median(t_dense);
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_bench_csv(const std::vector<BenchRow>& rows, const BenchConfig& cfg, std::ostream& out) {
  out << "# repetitions=" << cfg.repetitions << " warmup=" << cfg.warmup << " inner_loops=" << cfg.inner_loops
      << " seed=" << cfg.seed << " timing=median\n";
  out << "density,n,m,ns_masked,ns_dense,speedup,equivalent\n";
  for (const auto& r : rows)
    out << r.density << ',' << r.n << ',' << r.m << ',' << r.ns_masked << ',' << r.ns_dense << ','
        << r.speedup() << ',' << (r.equivalent ? "true" : "false") << '\n';
}

}  // namespace spikenet
