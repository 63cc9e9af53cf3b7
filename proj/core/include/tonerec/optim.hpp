#pragma once

#include <cstdint>
#include <vector>

#include "tonerec/tensor.hpp"

namespace tonerec {

template <class S>
struct AdamState {
  std::vector<std::vector<S>> m;  // first moments, one vector per parameter tensor
  std::vector<std::vector<S>> v;  // second moments
  long long step = 0;

  static AdamState init_like(const std::vector<TensorT<S>*>& params);
};

// Standard Adam with bias correction. Throws "diverged" on non-finite
// gradients.
template <class S>
void adam_step(const std::vector<TensorT<S>*>& params,
               const std::vector<const TensorT<S>*>& grads, AdamState<S>& state,
               double lr, double beta1, double beta2, double eps);

// Global-norm clipping over all gradient tensors; returns the pre-clip norm.
template <class S>
double clip_gradients(const std::vector<TensorT<S>*>& grads, double clip_norm);

// Learning rate in effect after each epoch's end-of-epoch decision: halved
// whenever the dev loss exceeded the previous epoch's dev loss.
std::vector<double> lr_schedule(const std::vector<double>& dev_losses, double lr0);

}  // namespace tonerec
