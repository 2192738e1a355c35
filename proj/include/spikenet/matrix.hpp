#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spikenet {

// Dense row-major matrix. Rows of spikes or messages are handed around as
// spans, so contiguous row blocks (a parent's sampled children) are a single
// span as well.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // Rows [first, first + count) as one contiguous span.
  std::span<T> rows_span(std::size_t first, std::size_t count) {
    return {data_.data() + first * cols_, count * cols_};
  }
  std::span<const T> rows_span(std::size_t first, std::size_t count) const {
    return {data_.data() + first * cols_, count * cols_};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <class U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    std::transform(data_.begin(), data_.end(), out.values().begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

/// Binary-vector times matrix by row selection: out = sum of W's rows i with
/// spikes[i] == 1. Only additions on this path.
template <class T>
void masked_sum(std::span<const T> spikes, const Matrix<T>& weights, std::span<T> out) {
  detail::require(spikes.size() == weights.rows(), "masked_sum: spike length != weight rows");
  detail::require(out.size() == weights.cols(), "masked_sum: output length != weight cols");
  std::fill(out.begin(), out.end(), T{});
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    if (spikes[i] == T{0}) continue;
    detail::require(spikes[i] == T{1}, "masked_sum: spike vector is not binary");
    auto w = weights.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[j];
  }
}

template <class T>
std::vector<T> masked_sum(std::span<const T> spikes, const Matrix<T>& weights) {
  std::vector<T> out(weights.cols());
  masked_sum<T>(spikes, weights, out);
  return out;
}

/// Analog input times matrix: out = x * W.
template <class T>
void dense_affine(std::span<const T> x, const Matrix<T>& weights, std::span<T> out) {
  detail::require(x.size() == weights.rows(), "dense_affine: input length != weight rows");
  detail::require(out.size() == weights.cols(), "dense_affine: output length != weight cols");
  std::fill(out.begin(), out.end(), T{});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T xi = x[i];
    if (xi == T{0}) continue;
    auto w = weights.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += xi * w[j];
  }
}

template <class T>
std::vector<T> dense_affine(std::span<const T> x, const Matrix<T>& weights) {
  std::vector<T> out(weights.cols());
  dense_affine<T>(x, weights, out);
  return out;
}

/// Plain multiply-accumulate product x * W with no zero skipping; the
/// reference the masked path is benchmarked against.
template <class T>
void dense_product(std::span<const T> x, const Matrix<T>& weights, std::span<T> out) {
  detail::require(x.size() == weights.rows(), "dense_product: input length != weight rows");
  detail::require(out.size() == weights.cols(), "dense_product: output length != weight cols");
  std::fill(out.begin(), out.end(), T{});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T xi = x[i];
    auto w = weights.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += xi * w[j];
  }
}

// Backward pieces of y = x * W.

/// grad_w += outer(x, grad_out), skipping zero inputs.
template <class T>
void accumulate_weight_grad(std::span<const T> x, std::span<const T> grad_out,
                            Matrix<T>& grad_w) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T xi = x[i];
    if (xi == T{0}) continue;
    auto g = grad_w.row(i);
    for (std::size_t j = 0; j < grad_out.size(); ++j) g[j] += xi * grad_out[j];
  }
}

/// Transposed masked sum: scatter grad_out into the rows selected by spikes.
template <class T>
void masked_sum_backward_weights(std::span<const T> spikes, std::span<const T> grad_out,
                                 Matrix<T>& grad_w) {
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    if (spikes[i] == T{0}) continue;
    auto g = grad_w.row(i);
    for (std::size_t j = 0; j < grad_out.size(); ++j) g[j] += grad_out[j];
  }
}

/// grad_in += W * grad_out.
template <class T>
void accumulate_input_grad(std::span<const T> grad_out, const Matrix<T>& weights,
                           std::span<T> grad_in) {
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    auto w = weights.row(i);
    T acc{};
    for (std::size_t j = 0; j < grad_out.size(); ++j) acc += w[j] * grad_out[j];
    grad_in[i] += acc;
  }
}

/// Element-wise mean over the parent's own message and its block of `fanout`
/// neighbor messages (neighbors laid out contiguously, fanout * dim values).
template <class T>
void aggregate_mean(std::span<const T> self, std::span<const T> neighbors, std::size_t fanout,
                    std::span<T> out) {
  const std::size_t dim = self.size();
  detail::require(neighbors.size() == fanout * dim, "aggregate_mean: neighbor block size");
  detail::require(out.size() == dim, "aggregate_mean: output length");
  const T scale = T{1} / static_cast<T>(fanout + 1);
  for (std::size_t j = 0; j < dim; ++j) out[j] = self[j];
  for (std::size_t c = 0; c < fanout; ++c)
    for (std::size_t j = 0; j < dim; ++j) out[j] += neighbors[c * dim + j];
  for (std::size_t j = 0; j < dim; ++j) out[j] *= scale;
}

template <class T>
std::vector<T> aggregate_mean(std::span<const T> self, std::span<const T> neighbors,
                              std::size_t fanout) {
  std::vector<T> out(self.size());
  aggregate_mean<T>(self, neighbors, fanout, out);
  return out;
}

}  // namespace spikenet
