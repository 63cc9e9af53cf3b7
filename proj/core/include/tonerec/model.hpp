#pragma once

#include <string>
#include <vector>

#include "tonerec/dsp.hpp"
#include "tonerec/nn.hpp"
#include "tonerec/types.hpp"

namespace tonerec {

struct ModelConfig {
  int conv_channels = 16;
  int hidden = 128;
  double dropout_rate = 0.5;
  void validate() const;
};

template <class S>
struct ModelParams {
  Conv2d<S> conv1, conv2, conv3;
  GruCell<S> gru_fwd, gru_bwd;
  Affine<S> out;
};

template <class S>
struct NamedTensor {
  std::string name;
  TensorT<S>* tensor;
};

// Checkpoint order: conv1..conv3 (kernels, bias), gru_fwd then gru_bwd
// (w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h), out (weight, bias).
template <class S>
std::vector<NamedTensor<S>> named_tensors(ModelParams<S>& params);

template <class S>
ModelParams<S> make_params(const ModelConfig& cfg, int gru_input_dim);

template <class S>
ModelParams<S> zeros_like(const ModelParams<S>& p);

template <class S>
void accumulate(ModelParams<S>& dst, const ModelParams<S>& src);

template <class S>
void scale(ModelParams<S>& p, S factor);

template <class S>
struct ModelCache {
  TensorT<S> image;                  // [1][bins][frames]
  TensorT<S> conv1_out, conv2_out, conv3_out;
  MaxPoolCache pool1, pool2, pool3;
  TensorT<S> pool1_out, pool2_out, pool3_out;  // pre-ReLU
  TensorT<S> relu1_out, relu2_out, relu3_out;
  TensorT<S> stacked;
  TensorT<S> dropout_mask;
  TensorT<S> dropped;
  BiGruCache<S> bigru;
  TensorT<S> gru_out;
};

// The Table-1 stack: (conv 11x11 -> maxpool 4x4/2 -> ReLU) x3, dropout,
// feature stacking, BiGRU, affine to 6 logits per step.
template <class S>
struct ToneNet {
  ModelConfig cfg;
  ModelParams<S> params;

  static ToneNet init(const ModelConfig& cfg, int input_bins, std::uint64_t seed);

  // feat: [num_frames x num_bins]. Throws "utterance too short for receptive
  // field" when a conv/pool stage underflows on either axis.
  TensorT<S> forward(const Cepstrogram& feat, bool train, Rng* rng,
                     ModelCache<S>* cache) const;

  void backward(const ModelCache<S>& cache, const TensorT<S>& dlogits,
                ModelParams<S>& grads) const;
};

template <class S>
ToneNet<S> convert_model(const ToneNet<float>& m);

using ToneNetF = ToneNet<float>;
using ToneNetD = ToneNet<double>;

}  // namespace tonerec
