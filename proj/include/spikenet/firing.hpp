#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "spikenet/error.hpp"
#include "spikenet/net.hpp"

namespace spikenet {

struct FiringReport {
  double overall = 0.0;
  std::vector<double> per_step;
  std::vector<double> per_interval;  // steps grouped into equal-width intervals
};

namespace detail {

inline std::vector<double> group_rates(const std::vector<double>& spikes, const std::vector<double>& slots,
                                       std::size_t intervals) {
  const std::size_t T = spikes.size();
  if (intervals == 0 || T == 0) return {};
  intervals = std::min(intervals, T);
  std::vector<double> out(intervals);
  for (std::size_t i = 0; i < intervals; ++i) {
    double s = 0, n = 0;
    for (std::size_t t = T * i / intervals; t < T * (i + 1) / intervals; ++t) {
      s += spikes[t];
      n += slots[t];
    }
    out[i] = n > 0 ? s / n : 0.0;
  }
  return out;
}

}  // namespace detail

inline FiringReport firing_report(const std::vector<double>& spikes, const std::vector<double>& slots,
                                  std::size_t intervals = 1) {
  FiringReport r;
  double s = 0, n = 0;
  for (std::size_t t = 0; t < spikes.size(); ++t) {
    s += spikes[t];
    n += slots[t];
    r.per_step.push_back(slots[t] > 0 ? spikes[t] / slots[t] : 0.0);
  }
  r.overall = n > 0 ? s / n : 0.0;
  r.per_interval = detail::group_rates(spikes, slots, intervals);
  return r;
}

inline FiringReport firing_report(const FiringStats& stats, std::size_t intervals = 1) {
  return firing_report(stats.spikes, stats.slots, intervals);
}

/// #spikes / (#steps x #neurons), overall, per step and per interval.
template <class T>
FiringReport firing_rate(const std::vector<SpikeHistory<T>>& histories, std::size_t intervals = 1) {
  std::vector<double> spikes, slots;
  for (const auto& h : histories) {
    if (spikes.empty()) {
      spikes.assign(h.num_steps(), 0.0);
      slots.assign(h.num_steps(), 0.0);
    } else if (h.num_steps() != spikes.size()) {
      throw InputError("firing_rate: histories disagree on the number of steps");
    }
    for (std::size_t b = 0; b < h.num_roots(); ++b)
      for (std::size_t t = 0; t < h.num_steps(); ++t) {
        for (T v : h.at(b, t)) spikes[t] += static_cast<double>(v);
        slots[t] += static_cast<double>(h.dim());
      }
  }
  return firing_report(spikes, slots, intervals);
}

}  // namespace spikenet
