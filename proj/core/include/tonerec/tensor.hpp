#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tonerec {

// Row-major n-dimensional array with optional paired gradient storage.
// grad is either empty or exactly values.size() entries.
template <class S>
struct TensorT {
  std::vector<int> shape;
  std::vector<S> values;
  std::vector<S> grad;

  TensorT() = default;

  explicit TensorT(std::vector<int> dims) : shape(std::move(dims)) {
    values.assign(static_cast<size_t>(numel_of(shape)), S(0));
  }

  static TensorT zeros(std::vector<int> dims) { return TensorT(std::move(dims)); }

  static std::int64_t numel_of(const std::vector<int>& dims) {
    std::int64_t n = 1;
    for (int d : dims) {
      if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
      n *= d;
    }
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(values.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  S& operator()(int i) { return values[static_cast<size_t>(i)]; }
  const S& operator()(int i) const { return values[static_cast<size_t>(i)]; }

  S& operator()(int i, int j) {
    return values[static_cast<size_t>(i) * shape[1] + j];
  }
  const S& operator()(int i, int j) const {
    return values[static_cast<size_t>(i) * shape[1] + j];
  }

  S& operator()(int i, int j, int k) {
    return values[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  const S& operator()(int i, int j, int k) const {
    return values[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }

  S& operator()(int i, int j, int k, int l) {
    return values[((static_cast<size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }
  const S& operator()(int i, int j, int k, int l) const {
    return values[((static_cast<size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), S(0));
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), S(0)); }
  void fill(S v) { std::fill(values.begin(), values.end(), v); }

  bool same_shape(const TensorT& other) const { return shape == other.shape; }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace tonerec
