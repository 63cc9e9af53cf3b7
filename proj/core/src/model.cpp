#include "tonerec/model.hpp"

#include <stdexcept>

namespace tonerec {

void ModelConfig::validate() const {
  if (conv_channels < 1) throw std::invalid_argument("conv_channels must be positive");
  if (hidden < 1) throw std::invalid_argument("hidden must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("dropout_rate must be in [0,1)");
  }
}

template <class S>
std::vector<NamedTensor<S>> named_tensors(ModelParams<S>& p) {
  std::vector<NamedTensor<S>> out;
  auto add_conv = [&out](const std::string& prefix, Conv2d<S>& c) {
    out.push_back({prefix + ".kernels", &c.kernels});
    out.push_back({prefix + ".bias", &c.bias});
  };
  auto add_gru = [&out](const std::string& prefix, GruCell<S>& g) {
    out.push_back({prefix + ".w_z", &g.w_z});
    out.push_back({prefix + ".u_z", &g.u_z});
    out.push_back({prefix + ".b_z", &g.b_z});
    out.push_back({prefix + ".w_r", &g.w_r});
    out.push_back({prefix + ".u_r", &g.u_r});
    out.push_back({prefix + ".b_r", &g.b_r});
    out.push_back({prefix + ".w_h", &g.w_h});
    out.push_back({prefix + ".u_h", &g.u_h});
    out.push_back({prefix + ".b_h", &g.b_h});
  };
  add_conv("conv1", p.conv1);
  add_conv("conv2", p.conv2);
  add_conv("conv3", p.conv3);
  add_gru("gru_fwd", p.gru_fwd);
  add_gru("gru_bwd", p.gru_bwd);
  out.push_back({"out.weight", &p.out.weight});
  out.push_back({"out.bias", &p.out.bias});
  return out;
}

template <class S>
ModelParams<S> make_params(const ModelConfig& cfg, int gru_input_dim) {
  ModelParams<S> p;
  p.conv1 = Conv2d<S>::make(cfg.conv_channels, 1);
  p.conv2 = Conv2d<S>::make(cfg.conv_channels, cfg.conv_channels);
  p.conv3 = Conv2d<S>::make(cfg.conv_channels, cfg.conv_channels);
  p.gru_fwd = GruCell<S>::make(gru_input_dim, cfg.hidden);
  p.gru_bwd = GruCell<S>::make(gru_input_dim, cfg.hidden);
  p.out = Affine<S>::make(kNumClasses, 2 * cfg.hidden);
  return p;
}

template <class S>
ModelParams<S> zeros_like(const ModelParams<S>& p) {
  ModelParams<S> z;
  z.conv1 = Conv2d<S>::make(p.conv1.out_channels(), p.conv1.in_channels());
  z.conv2 = Conv2d<S>::make(p.conv2.out_channels(), p.conv2.in_channels());
  z.conv3 = Conv2d<S>::make(p.conv3.out_channels(), p.conv3.in_channels());
  z.gru_fwd = GruCell<S>::make(p.gru_fwd.input_dim, p.gru_fwd.hidden);
  z.gru_bwd = GruCell<S>::make(p.gru_bwd.input_dim, p.gru_bwd.hidden);
  z.out = Affine<S>::make(p.out.weight.dim(0), p.out.weight.dim(1));
  return z;
}

template <class S>
void accumulate(ModelParams<S>& dst, const ModelParams<S>& src) {
  auto d = named_tensors(dst);
  auto s = named_tensors(const_cast<ModelParams<S>&>(src));
  for (size_t i = 0; i < d.size(); ++i) {
    for (size_t j = 0; j < d[i].tensor->values.size(); ++j) {
      d[i].tensor->values[j] += s[i].tensor->values[j];
    }
  }
}

template <class S>
void scale(ModelParams<S>& p, S factor) {
  for (auto& nt : named_tensors(p)) {
    for (S& v : nt.tensor->values) v *= factor;
  }
}

template <class S>
ToneNet<S> ToneNet<S>::init(const ModelConfig& cfg, int input_bins, std::uint64_t seed) {
  cfg.validate();
  const int bins_out = conv_stack_steps(input_bins);
  if (bins_out < 1) {
    throw std::invalid_argument("input_bins too small for the conv stack");
  }
  ToneNet<S> net;
  net.cfg = cfg;
  net.params = make_params<S>(cfg, cfg.conv_channels * bins_out);

  Rng rng(mix_seed(seed, 0x746f6e65));
  const int k2 = kConvKernel * kConvKernel;
  init_uniform(net.params.conv1.kernels, 1 * k2, rng);
  init_uniform(net.params.conv2.kernels, cfg.conv_channels * k2, rng);
  init_uniform(net.params.conv3.kernels, cfg.conv_channels * k2, rng);
  for (GruCell<S>* g : {&net.params.gru_fwd, &net.params.gru_bwd}) {
    init_uniform(g->w_z, g->input_dim, rng);
    init_uniform(g->u_z, g->hidden, rng);
    init_uniform(g->w_r, g->input_dim, rng);
    init_uniform(g->u_r, g->hidden, rng);
    init_uniform(g->w_h, g->input_dim, rng);
    init_uniform(g->u_h, g->hidden, rng);
  }
  init_uniform(net.params.out.weight, 2 * cfg.hidden, rng);
  return net;
}

template <class S>
TensorT<S> ToneNet<S>::forward(const Cepstrogram& feat, bool train, Rng* rng,
                               ModelCache<S>* cache) const {
  if (feat.num_frames < 1 || feat.num_bins < 1) {
    throw std::invalid_argument("empty feature map");
  }
  if (conv_stack_steps(feat.num_frames) < 1 || conv_stack_steps(feat.num_bins) < 1) {
    throw std::invalid_argument("utterance too short for receptive field");
  }

  ModelCache<S> local;
  ModelCache<S>& c = cache != nullptr ? *cache : local;

  // quefrency on H, time on W
  c.image = TensorT<S>({1, feat.num_bins, feat.num_frames});
  for (int f = 0; f < feat.num_frames; ++f) {
    const float* row = feat.row(f);
    for (int b = 0; b < feat.num_bins; ++b) {
      c.image(0, b, f) = static_cast<S>(row[b]);
    }
  }

  c.conv1_out = conv2d_forward(c.image, params.conv1);
  c.pool1_out = maxpool_forward(c.conv1_out, &c.pool1);
  c.relu1_out = relu(c.pool1_out);

  c.conv2_out = conv2d_forward(c.relu1_out, params.conv2);
  c.pool2_out = maxpool_forward(c.conv2_out, &c.pool2);
  c.relu2_out = relu(c.pool2_out);

  c.conv3_out = conv2d_forward(c.relu2_out, params.conv3);
  c.pool3_out = maxpool_forward(c.conv3_out, &c.pool3);
  c.relu3_out = relu(c.pool3_out);

  c.stacked = stack_features(c.relu3_out);
  if (c.stacked.dim(1) != params.gru_fwd.input_dim) {
    throw std::invalid_argument("checkpoint/model shape mismatch: feature dim " +
                                std::to_string(c.stacked.dim(1)) + " vs model " +
                                std::to_string(params.gru_fwd.input_dim));
  }

  if (train && cfg.dropout_rate > 0.0) {
    if (rng == nullptr) throw std::invalid_argument("train mode needs an rng");
    c.dropped = dropout(c.stacked, cfg.dropout_rate, true, *rng, &c.dropout_mask);
  } else {
    Rng unused(0);
    c.dropped = dropout(c.stacked, 0.0, false, unused, &c.dropout_mask);
  }

  c.gru_out = bigru_forward(params.gru_fwd, params.gru_bwd, c.dropped, &c.bigru);
  return affine_forward(c.gru_out, params.out);
}

template <class S>
void ToneNet<S>::backward(const ModelCache<S>& c, const TensorT<S>& dlogits,
                          ModelParams<S>& grads) const {
  TensorT<S> d_gru;
  affine_backward(c.gru_out, params.out, dlogits, grads.out, &d_gru);

  TensorT<S> d_dropped;
  bigru_backward(params.gru_fwd, params.gru_bwd, c.dropped, c.bigru, d_gru,
                 grads.gru_fwd, grads.gru_bwd, &d_dropped);

  TensorT<S> d_stacked = dropout_backward(c.dropout_mask, d_dropped);
  TensorT<S> d_relu3 = stack_features_backward(c.relu3_out.shape, d_stacked);

  TensorT<S> d_pool3 = relu_backward(c.pool3_out, d_relu3);
  TensorT<S> d_conv3 = maxpool_backward<S>(c.pool3, d_pool3);
  TensorT<S> d_relu2;
  conv2d_backward(c.relu2_out, params.conv3, d_conv3, grads.conv3, &d_relu2);

  TensorT<S> d_pool2 = relu_backward(c.pool2_out, d_relu2);
  TensorT<S> d_conv2 = maxpool_backward<S>(c.pool2, d_pool2);
  TensorT<S> d_relu1;
  conv2d_backward(c.relu1_out, params.conv2, d_conv2, grads.conv2, &d_relu1);

  TensorT<S> d_pool1 = relu_backward(c.pool1_out, d_relu1);
  TensorT<S> d_conv1 = maxpool_backward<S>(c.pool1, d_pool1);
  // input gradient is never needed
  conv2d_backward<S>(c.image, params.conv1, d_conv1, grads.conv1, nullptr);
}

template <class S>
ToneNet<S> convert_model(const ToneNet<float>& m) {
  ToneNet<S> out;
  out.cfg = m.cfg;
  out.params = make_params<S>(m.cfg, m.params.gru_fwd.input_dim);
  auto src = named_tensors(const_cast<ModelParams<float>&>(m.params));
  auto dst = named_tensors(out.params);
  for (size_t i = 0; i < src.size(); ++i) {
    for (size_t j = 0; j < src[i].tensor->values.size(); ++j) {
      dst[i].tensor->values[j] = static_cast<S>(src[i].tensor->values[j]);
    }
  }
  return out;
}

#define TONEREC_INSTANTIATE_MODEL(S)                                    \
  template std::vector<NamedTensor<S>> named_tensors<S>(ModelParams<S>&); \
  template ModelParams<S> make_params<S>(const ModelConfig&, int);      \
  template ModelParams<S> zeros_like<S>(const ModelParams<S>&);         \
  template void accumulate<S>(ModelParams<S>&, const ModelParams<S>&);  \
  template void scale<S>(ModelParams<S>&, S);                           \
  template struct ToneNet<S>;

TONEREC_INSTANTIATE_MODEL(float)
TONEREC_INSTANTIATE_MODEL(double)

template ToneNet<float> convert_model<float>(const ToneNet<float>&);
template ToneNet<double> convert_model<double>(const ToneNet<float>&);

#undef TONEREC_INSTANTIATE_MODEL

}  // namespace tonerec
