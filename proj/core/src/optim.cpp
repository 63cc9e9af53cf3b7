#include "tonerec/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tonerec {

template <class S>
AdamState<S> AdamState<S>::init_like(const std::vector<TensorT<S>*>& params) {
  AdamState<S> st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const TensorT<S>* p : params) {
    st.m.emplace_back(p->values.size(), S(0));
    st.v.emplace_back(p->values.size(), S(0));
  }
  return st;
}

template <class S>
void adam_step(const std::vector<TensorT<S>*>& params,
               const std::vector<const TensorT<S>*>& grads, AdamState<S>& state,
               double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam: parameter/gradient count mismatch");
  }
  for (size_t i = 0; i < grads.size(); ++i) {
    for (S g : grads[i]->values) {
      if (!std::isfinite(static_cast<double>(g))) throw std::runtime_error("diverged");
    }
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->values.size() != grads[i]->values.size()) {
      throw std::invalid_argument("adam: shape mismatch");
    }
    S* theta = params[i]->values.data();
    const S* g = grads[i]->values.data();
    S* m = state.m[i].data();
    S* v = state.v[i].data();
    const size_t n = params[i]->values.size();
    for (size_t j = 0; j < n; ++j) {
      const double gj = static_cast<double>(g[j]);
      const double mj = beta1 * static_cast<double>(m[j]) + (1.0 - beta1) * gj;
      const double vj = beta2 * static_cast<double>(v[j]) + (1.0 - beta2) * gj * gj;
      m[j] = static_cast<S>(mj);
      v[j] = static_cast<S>(vj);
      const double m_hat = mj / bc1;
      const double v_hat = vj / bc2;
      theta[j] = static_cast<S>(static_cast<double>(theta[j]) -
                                lr * m_hat / (std::sqrt(v_hat) + eps));
    }
  }
}

template <class S>
double clip_gradients(const std::vector<TensorT<S>*>& grads, double clip_norm) {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be positive");
  double sq = 0.0;
  for (const TensorT<S>* g : grads) {
    for (S v : g->values) {
      const double d = static_cast<double>(v);
      sq += d * d;
    }
  }
  const double norm = std::sqrt(sq);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (TensorT<S>* g : grads) {
      for (S& v : g->values) v = static_cast<S>(static_cast<double>(v) * scale);
    }
  }
  return norm;
}

std::vector<double> lr_schedule(const std::vector<double>& dev_losses, double lr0) {
  std::vector<double> lr;
  lr.reserve(dev_losses.size());
  double cur = lr0;
  for (size_t e = 0; e < dev_losses.size(); ++e) {
    if (e > 0 && dev_losses[e] > dev_losses[e - 1]) cur *= 0.5;
    lr.push_back(cur);
  }
  return lr;
}

#define TONEREC_INSTANTIATE_OPTIM(S)                                             \
  template struct AdamState<S>;                                                  \
  template void adam_step<S>(const std::vector<TensorT<S>*>&,                    \
                             const std::vector<const TensorT<S>*>&, AdamState<S>&, \
                             double, double, double, double);                    \
  template double clip_gradients<S>(const std::vector<TensorT<S>*>&, double);

TONEREC_INSTANTIATE_OPTIM(float)
TONEREC_INSTANTIATE_OPTIM(double)

#undef TONEREC_INSTANTIATE_OPTIM

}  // namespace tonerec
