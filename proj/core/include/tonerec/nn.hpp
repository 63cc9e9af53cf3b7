#pragma once

#include <cstdint>
#include <vector>

#include "tonerec/rng.hpp"
#include "tonerec/tensor.hpp"

namespace tonerec {

inline constexpr int kConvKernel = 11;
inline constexpr int kPoolWindow = 4;
inline constexpr int kPoolStride = 2;

int conv_output_len(int in_len);  // in - (kConvKernel - 1); -1 when too short
int pool_output_len(int in_len);  // (in - kPoolWindow)/kPoolStride + 1; -1 when too short
// Length surviving conv/pool/conv/pool/conv/pool, or -1 when any stage underflows.
int conv_stack_steps(int len);
// Smallest input length whose conv_stack_steps is >= steps.
int min_frames_for_steps(int steps);

template <class S>
struct Conv2d {
  TensorT<S> kernels;  // [out_ch][in_ch][11][11]
  TensorT<S> bias;     // [out_ch]
  static Conv2d make(int out_ch, int in_ch);
  int out_channels() const { return kernels.dim(0); }
  int in_channels() const { return kernels.dim(1); }
};

// Valid (no padding) cross-correlation, stride 1: [C_in][H][W] -> [C_out][H-10][W-10].
template <class S>
TensorT<S> conv2d_forward(const TensorT<S>& x, const Conv2d<S>& layer);

// Accumulates kernel/bias gradients into `grads`; writes input gradient to
// *dx when dx is non-null.
template <class S>
void conv2d_backward(const TensorT<S>& x, const Conv2d<S>& layer, const TensorT<S>& dy,
                     Conv2d<S>& grads, TensorT<S>* dx);

// 4x4 max pooling, stride 2, no padding. Ties break to the first maximum in
// row-major scan order. The cache stores the flat input index of each winner.
struct MaxPoolCache {
  std::vector<int> x_shape;
  std::vector<std::int32_t> argmax;
};

template <class S>
TensorT<S> maxpool_forward(const TensorT<S>& x, MaxPoolCache* cache);

template <class S>
TensorT<S> maxpool_backward(const MaxPoolCache& cache, const TensorT<S>& dy);

template <class S>
TensorT<S> relu(const TensorT<S>& x);

template <class S>
TensorT<S> relu_backward(const TensorT<S>& x, const TensorT<S>& dy);

// Inverted dropout: in train mode each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); eval mode is the identity.
// The mask (entries 0 or 1/(1-rate)) is written to *mask for the backward pass.
template <class S>
TensorT<S> dropout(const TensorT<S>& x, double rate, bool train, Rng& rng,
                   TensorT<S>* mask);

template <class S>
TensorT<S> dropout_backward(const TensorT<S>& mask, const TensorT<S>& dy);

template <class S>
struct Affine {
  TensorT<S> weight;  // [out][in]
  TensorT<S> bias;    // [out]
  static Affine make(int out_dim, int in_dim);
};

template <class S>
TensorT<S> affine_forward(const TensorT<S>& x, const Affine<S>& layer);  // [T][in] -> [T][out]

template <class S>
void affine_backward(const TensorT<S>& x, const Affine<S>& layer, const TensorT<S>& dy,
                     Affine<S>& grads, TensorT<S>* dx);

// Gated recurrent unit:
//   z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
//   r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
//   hc_t = tanh(W_h x_t + U_h (r_t * h_{t-1}) + b_h)
//   h_t = (1 - z_t) * h_{t-1} + z_t * hc_t
template <class S>
struct GruCell {
  int input_dim = 0;
  int hidden = 0;
  TensorT<S> w_z, u_z, b_z;
  TensorT<S> w_r, u_r, b_r;
  TensorT<S> w_h, u_h, b_h;
  static GruCell make(int input_dim, int hidden);
};

template <class S>
struct GruCache {
  TensorT<S> z, r, hc, h;  // each [T][hidden]
};

template <class S>
TensorT<S> gru_forward(const GruCell<S>& cell, const TensorT<S>& inputs,
                       const TensorT<S>& h0, GruCache<S>* cache);

template <class S>
void gru_backward(const GruCell<S>& cell, const TensorT<S>& inputs, const TensorT<S>& h0,
                  const GruCache<S>& cache, const TensorT<S>& dh, GruCell<S>& grads,
                  TensorT<S>* dinputs);

// Forward pass over t = 1..T and backward pass over t = T..1, concatenated
// per step: [T][D] -> [T][2*hidden]. Both directions start from zero state.
template <class S>
struct BiGruCache {
  GruCache<S> fwd;
  GruCache<S> bwd;  // stored in reversed time order
};

template <class S>
TensorT<S> bigru_forward(const GruCell<S>& fwd, const GruCell<S>& bwd,
                         const TensorT<S>& inputs, BiGruCache<S>* cache);

template <class S>
void bigru_backward(const GruCell<S>& fwd, const GruCell<S>& bwd, const TensorT<S>& inputs,
                    const BiGruCache<S>& cache, const TensorT<S>& dh,
                    GruCell<S>& grads_fwd, GruCell<S>& grads_bwd, TensorT<S>* dinputs);

// [C][H][T] -> [T][C*H]: per timestep, channel blocks of quefrency columns.
template <class S>
TensorT<S> stack_features(const TensorT<S>& conv_out);

template <class S>
TensorT<S> stack_features_backward(const std::vector<int>& conv_shape, const TensorT<S>& dy);

// Uniform in +/- sqrt(3/fan_in) (unit variance gain).
template <class S>
void init_uniform(TensorT<S>& t, int fan_in, Rng& rng);

}  // namespace tonerec
