#include "tonerec/nn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace tonerec {

int conv_output_len(int in_len) {
  return in_len >= kConvKernel ? in_len - (kConvKernel - 1) : -1;
}

int pool_output_len(int in_len) {
  return in_len >= kPoolWindow ? (in_len - kPoolWindow) / kPoolStride + 1 : -1;
}

int conv_stack_steps(int len) {
  for (int stage = 0; stage < 3; ++stage) {
    len = conv_output_len(len);
    if (len < 0) return -1;
    len = pool_output_len(len);
    if (len < 0) return -1;
  }
  return len;
}

int min_frames_for_steps(int steps) {
  for (int len = kConvKernel;; ++len) {
    if (conv_stack_steps(len) >= steps) return len;
  }
}

namespace {

template <class S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

// Fixed-order 16-lane dot product; vectorizes without reassociating the
// reduction, so results are identical across optimization levels.
template <class S>
S lane_dot(const S* a, const S* b, int n) {
  constexpr int kLanes = 16;
  S acc[kLanes] = {};
  int i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (int l = 0; l < kLanes; ++l) acc[l] += a[i + l] * b[i + l];
  }
  S total = S(0);
  for (; i < n; ++i) total += a[i] * b[i];
  for (int l = 0; l < kLanes; ++l) total += acc[l];
  return total;
}

template <class S>
void axpy(S* y, const S* x, S a, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

template <class S>
Conv2d<S> Conv2d<S>::make(int out_ch, int in_ch) {
  Conv2d<S> c;
  c.kernels = TensorT<S>({out_ch, in_ch, kConvKernel, kConvKernel});
  c.bias = TensorT<S>({out_ch});
  return c;
}

namespace {

// 64-byte GCC vector types; every lane keeps a fixed accumulation order, so
// results are identical from run to run.
template <class S>
struct Simd;
template <>
struct Simd<float> {
  typedef float Vec __attribute__((vector_size(64)));
  static constexpr int kLanes = 16;
};
template <>
struct Simd<double> {
  typedef double Vec __attribute__((vector_size(64)));
  static constexpr int kLanes = 8;
};

template <class S>
inline typename Simd<S>::Vec vload(const S* p) {
  typename Simd<S>::Vec v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

template <class S>
inline void vstore(S* p, typename Simd<S>::Vec v) {
  std::memcpy(p, &v, sizeof(v));
}

// One kernel row applied to one input row: y[ox] += sum_kx taps[kx]*xrow[ox+kx].
template <class S>
void stencil_row(S* __restrict yrow, const S* __restrict xrow,
                 const S* __restrict taps, int ow) {
  constexpr int kLanes = Simd<S>::kLanes;
  int ox = 0;
  for (; ox + kLanes <= ow; ox += kLanes) {
    typename Simd<S>::Vec acc = vload(yrow + ox);
    for (int kx = 0; kx < kConvKernel; ++kx) acc += taps[kx] * vload(xrow + ox + kx);
    vstore(yrow + ox, acc);
  }
  for (; ox < ow; ++ox) {
    S acc = S(0);
    for (int kx = 0; kx < kConvKernel; ++kx) acc += taps[kx] * xrow[ox + kx];
    yrow[ox] += acc;
  }
}

}  // namespace

template <class S>
TensorT<S> conv2d_forward(const TensorT<S>& x, const Conv2d<S>& layer) {
  if (x.ndim() != 3 || x.dim(0) != layer.in_channels()) {
    throw std::invalid_argument("conv2d: channel mismatch");
  }
  const int in_ch = layer.in_channels();
  const int out_ch = layer.out_channels();
  const int h = x.dim(1);
  const int w = x.dim(2);
  const int oh = conv_output_len(h);
  const int ow = conv_output_len(w);
  if (oh < 1 || ow < 1) throw std::invalid_argument("input too small");

  TensorT<S> y({out_ch, oh, ow});
  const size_t x_plane = static_cast<size_t>(h) * w;
  const size_t y_plane = static_cast<size_t>(oh) * ow;
  const S* xv = x.values.data();
  const S* kv = layer.kernels.values.data();

  for (int co = 0; co < out_ch; ++co) {
    S* yp = y.values.data() + co * y_plane;
    std::fill(yp, yp + y_plane, layer.bias(co));
    for (int ci = 0; ci < in_ch; ++ci) {
      const S* xp = xv + ci * x_plane;
      const S* kp = kv + (static_cast<size_t>(co) * in_ch + ci) * kConvKernel * kConvKernel;
      for (int ky = 0; ky < kConvKernel; ++ky) {
        const S* taps = kp + ky * kConvKernel;
        for (int oy = 0; oy < oh; ++oy) {
          stencil_row(yp + static_cast<size_t>(oy) * ow,
                      xp + static_cast<size_t>(oy + ky) * w, taps, ow);
        }
      }
    }
  }
  return y;
}

namespace {

// Kernel-row gradient for one (ky, in-channel, out-channel) triple: all 11
// taps in a single pass over the plane, one named vector accumulator each.
template <class S>
void weight_grad_kernel_row(S* __restrict dw_taps, const S* __restrict dy_plane,
                            const S* __restrict x_rows, int oh, int ow, int x_width) {
  using Vec = typename Simd<S>::Vec;
  constexpr int kLanes = Simd<S>::kLanes;
  Vec a0{}, a1{}, a2{}, a3{}, a4{}, a5{}, a6{}, a7{}, a8{}, a9{}, a10{};
  S tail[kConvKernel] = {};
  for (int oy = 0; oy < oh; ++oy) {
    const S* dyr = dy_plane + static_cast<size_t>(oy) * ow;
    const S* xr = x_rows + static_cast<size_t>(oy) * x_width;
    int ox = 0;
    for (; ox + kLanes <= ow; ox += kLanes) {
      const Vec d = vload(dyr + ox);
      a0 += d * vload(xr + ox + 0);
      a1 += d * vload(xr + ox + 1);
      a2 += d * vload(xr + ox + 2);
      a3 += d * vload(xr + ox + 3);
      a4 += d * vload(xr + ox + 4);
      a5 += d * vload(xr + ox + 5);
      a6 += d * vload(xr + ox + 6);
      a7 += d * vload(xr + ox + 7);
      a8 += d * vload(xr + ox + 8);
      a9 += d * vload(xr + ox + 9);
      a10 += d * vload(xr + ox + 10);
    }
    for (; ox < ow; ++ox) {
      for (int kx = 0; kx < kConvKernel; ++kx) tail[kx] += dyr[ox] * xr[ox + kx];
    }
  }
  const Vec* accs[kConvKernel] = {&a0, &a1, &a2, &a3, &a4, &a5, &a6, &a7, &a8, &a9, &a10};
  for (int kx = 0; kx < kConvKernel; ++kx) {
    S total = tail[kx];
    for (int l = 0; l < kLanes; ++l) total += (*accs[kx])[l];
    dw_taps[kx] += total;
  }
}

}  // namespace

template <class S>
void conv2d_backward(const TensorT<S>& x, const Conv2d<S>& layer, const TensorT<S>& dy,
                     Conv2d<S>& grads, TensorT<S>* dx) {
  const int in_ch = layer.in_channels();
  const int out_ch = layer.out_channels();
  const int h = x.dim(1);
  const int w = x.dim(2);
  const int oh = dy.dim(1);
  const int ow = dy.dim(2);
  const size_t x_plane = static_cast<size_t>(h) * w;
  const size_t y_plane = static_cast<size_t>(oh) * ow;
  const S* xv = x.values.data();
  const S* dyv = dy.values.data();

  for (int co = 0; co < out_ch; ++co) {
    const S* dyp = dyv + co * y_plane;
    S bsum = S(0);
    for (size_t i = 0; i < y_plane; ++i) bsum += dyp[i];
    grads.bias(co) += bsum;

    for (int ci = 0; ci < in_ch; ++ci) {
      const S* xp = xv + ci * x_plane;
      S* gp = grads.kernels.values.data() +
              (static_cast<size_t>(co) * in_ch + ci) * kConvKernel * kConvKernel;
      for (int ky = 0; ky < kConvKernel; ++ky) {
        weight_grad_kernel_row(gp + ky * kConvKernel, dyp,
                               xp + static_cast<size_t>(ky) * w, oh, ow, w);
      }
    }
  }

  if (dx != nullptr) {
    // dx is the valid correlation of zero-padded dy with the rotated kernel,
    // so the forward stencil kernel is reused
    *dx = TensorT<S>({in_ch, h, w});
    const int pad = kConvKernel - 1;
    const int ph_w = ow + 2 * pad;
    std::vector<S> padded(static_cast<size_t>(oh + 2 * pad) * ph_w, S(0));
    S* dxv = dx->values.data();
    const S* kv = layer.kernels.values.data();
    S rot[kConvKernel * kConvKernel];

    for (int co = 0; co < out_ch; ++co) {
      const S* dyp = dyv + co * y_plane;
      for (int oy = 0; oy < oh; ++oy) {
        std::copy(dyp + static_cast<size_t>(oy) * ow, dyp + static_cast<size_t>(oy + 1) * ow,
                  padded.begin() + static_cast<size_t>(oy + pad) * ph_w + pad);
      }
      for (int ci = 0; ci < in_ch; ++ci) {
        const S* kp = kv + (static_cast<size_t>(co) * in_ch + ci) * kConvKernel * kConvKernel;
        for (int i = 0; i < kConvKernel * kConvKernel; ++i) {
          rot[i] = kp[kConvKernel * kConvKernel - 1 - i];
        }
        S* dxp = dxv + ci * x_plane;
        for (int jy = 0; jy < kConvKernel; ++jy) {
          const S* taps = rot + jy * kConvKernel;
          for (int y = 0; y < h; ++y) {
            stencil_row(dxp + static_cast<size_t>(y) * w,
                        padded.data() + static_cast<size_t>(y + jy) * ph_w, taps, w);
          }
        }
      }
    }
  }
}

template <class S>
TensorT<S> maxpool_forward(const TensorT<S>& x, MaxPoolCache* cache) {
  if (x.ndim() != 3) throw std::invalid_argument("maxpool: expected [C][H][W]");
  const int ch = x.dim(0);
  const int h = x.dim(1);
  const int w = x.dim(2);
  const int oh = pool_output_len(h);
  const int ow = pool_output_len(w);
  if (oh < 1 || ow < 1) throw std::invalid_argument("input too small");

  TensorT<S> y({ch, oh, ow});
  if (cache != nullptr) {
    cache->x_shape = x.shape;
    cache->argmax.assign(y.values.size(), 0);
  }
  const S* xv = x.values.data();
  S* yv = y.values.data();
  const size_t x_plane = static_cast<size_t>(h) * w;
  size_t out_idx = 0;
  for (int c = 0; c < ch; ++c) {
    const S* xp = xv + c * x_plane;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++out_idx) {
        const int iy0 = oy * kPoolStride;
        const int ix0 = ox * kPoolStride;
        S best = xp[static_cast<size_t>(iy0) * w + ix0];
        int best_idx = iy0 * w + ix0;
        for (int dy = 0; dy < kPoolWindow; ++dy) {
          const S* row = xp + static_cast<size_t>(iy0 + dy) * w + ix0;
          for (int dxi = 0; dxi < kPoolWindow; ++dxi) {
            if (row[dxi] > best) {
              best = row[dxi];
              best_idx = (iy0 + dy) * w + ix0 + dxi;
            }
          }
        }
        yv[out_idx] = best;
        if (cache != nullptr) {
          cache->argmax[out_idx] =
              static_cast<std::int32_t>(c * x_plane + static_cast<size_t>(best_idx));
        }
      }
    }
  }
  return y;
}

template <class S>
TensorT<S> maxpool_backward(const MaxPoolCache& cache, const TensorT<S>& dy) {
  TensorT<S> dx(cache.x_shape);
  // pool windows overlap (stride < window), so winners accumulate
  for (size_t i = 0; i < dy.values.size(); ++i) {
    dx.values[cache.argmax[i]] += dy.values[i];
  }
  return dx;
}

template <class S>
TensorT<S> relu(const TensorT<S>& x) {
  TensorT<S> y = x;
  for (S& v : y.values) v = v > S(0) ? v : S(0);
  return y;
}

template <class S>
TensorT<S> relu_backward(const TensorT<S>& x, const TensorT<S>& dy) {
  TensorT<S> dx = dy;
  for (size_t i = 0; i < dx.values.size(); ++i) {
    if (!(x.values[i] > S(0))) dx.values[i] = S(0);
  }
  return dx;
}

template <class S>
TensorT<S> dropout(const TensorT<S>& x, double rate, bool train, Rng& rng,
                   TensorT<S>* mask) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0,1)");
  if (!train || rate == 0.0) {
    if (mask != nullptr) {
      *mask = TensorT<S>(x.shape);
      mask->fill(S(1));
    }
    return x;
  }
  const S scale = static_cast<S>(1.0 / (1.0 - rate));
  TensorT<S> m(x.shape);
  TensorT<S> y(x.shape);
  for (size_t i = 0; i < x.values.size(); ++i) {
    const S keep = rng.uniform() >= rate ? scale : S(0);
    m.values[i] = keep;
    y.values[i] = x.values[i] * keep;
  }
  if (mask != nullptr) *mask = std::move(m);
  return y;
}

template <class S>
TensorT<S> dropout_backward(const TensorT<S>& mask, const TensorT<S>& dy) {
  TensorT<S> dx = dy;
  for (size_t i = 0; i < dx.values.size(); ++i) dx.values[i] *= mask.values[i];
  return dx;
}

template <class S>
Affine<S> Affine<S>::make(int out_dim, int in_dim) {
  Affine<S> a;
  a.weight = TensorT<S>({out_dim, in_dim});
  a.bias = TensorT<S>({out_dim});
  return a;
}

template <class S>
TensorT<S> affine_forward(const TensorT<S>& x, const Affine<S>& layer) {
  const int t_len = x.dim(0);
  const int in_dim = x.dim(1);
  const int out_dim = layer.weight.dim(0);
  if (in_dim != layer.weight.dim(1)) throw std::invalid_argument("affine: dimension mismatch");
  TensorT<S> y({t_len, out_dim});
  for (int t = 0; t < t_len; ++t) {
    const S* xr = &x(t, 0);
    for (int o = 0; o < out_dim; ++o) {
      y(t, o) = layer.bias(o) + lane_dot(&layer.weight(o, 0), xr, in_dim);
    }
  }
  return y;
}

template <class S>
void affine_backward(const TensorT<S>& x, const Affine<S>& layer, const TensorT<S>& dy,
                     Affine<S>& grads, TensorT<S>* dx) {
  const int t_len = x.dim(0);
  const int in_dim = x.dim(1);
  const int out_dim = layer.weight.dim(0);
  if (dx != nullptr) *dx = TensorT<S>({t_len, in_dim});
  for (int t = 0; t < t_len; ++t) {
    const S* xr = &x(t, 0);
    for (int o = 0; o < out_dim; ++o) {
      const S g = dy(t, o);
      grads.bias(o) += g;
      axpy(&grads.weight(o, 0), xr, g, in_dim);
      if (dx != nullptr) axpy(&(*dx)(t, 0), &layer.weight(o, 0), g, in_dim);
    }
  }
}

template <class S>
GruCell<S> GruCell<S>::make(int input_dim, int hidden) {
  GruCell<S> c;
  c.input_dim = input_dim;
  c.hidden = hidden;
  c.w_z = TensorT<S>({hidden, input_dim});
  c.u_z = TensorT<S>({hidden, hidden});
  c.b_z = TensorT<S>({hidden});
  c.w_r = TensorT<S>({hidden, input_dim});
  c.u_r = TensorT<S>({hidden, hidden});
  c.b_r = TensorT<S>({hidden});
  c.w_h = TensorT<S>({hidden, input_dim});
  c.u_h = TensorT<S>({hidden, hidden});
  c.b_h = TensorT<S>({hidden});
  return c;
}

template <class S>
TensorT<S> gru_forward(const GruCell<S>& cell, const TensorT<S>& inputs,
                       const TensorT<S>& h0, GruCache<S>* cache) {
  if (inputs.ndim() != 2 || inputs.dim(1) != cell.input_dim ||
      h0.numel() != cell.hidden) {
    throw std::invalid_argument("gru: dimension mismatch");
  }
  const int t_len = inputs.dim(0);
  const int hs = cell.hidden;
  const int d = cell.input_dim;

  TensorT<S> z({t_len, hs}), r({t_len, hs}), hc({t_len, hs}), h({t_len, hs});
  std::vector<S> h_prev(h0.values.begin(), h0.values.end());
  std::vector<S> rh(static_cast<size_t>(hs));

  for (int t = 0; t < t_len; ++t) {
    const S* xt = &inputs(t, 0);
    for (int i = 0; i < hs; ++i) {
      z(t, i) = sigmoid(cell.b_z(i) + lane_dot(&cell.w_z(i, 0), xt, d) +
                        lane_dot(&cell.u_z(i, 0), h_prev.data(), hs));
      r(t, i) = sigmoid(cell.b_r(i) + lane_dot(&cell.w_r(i, 0), xt, d) +
                        lane_dot(&cell.u_r(i, 0), h_prev.data(), hs));
    }
    for (int i = 0; i < hs; ++i) rh[i] = r(t, i) * h_prev[i];
    for (int i = 0; i < hs; ++i) {
      hc(t, i) = std::tanh(cell.b_h(i) + lane_dot(&cell.w_h(i, 0), xt, d) +
                           lane_dot(&cell.u_h(i, 0), rh.data(), hs));
      h(t, i) = (S(1) - z(t, i)) * h_prev[i] + z(t, i) * hc(t, i);
    }
    for (int i = 0; i < hs; ++i) h_prev[i] = h(t, i);
  }

  if (cache != nullptr) {
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->hc = std::move(hc);
    cache->h = h;
  }
  return h;
}

template <class S>
void gru_backward(const GruCell<S>& cell, const TensorT<S>& inputs, const TensorT<S>& h0,
                  const GruCache<S>& cache, const TensorT<S>& dh, GruCell<S>& grads,
                  TensorT<S>* dinputs) {
  const int t_len = inputs.dim(0);
  const int hs = cell.hidden;
  const int d = cell.input_dim;
  if (dinputs != nullptr) *dinputs = TensorT<S>({t_len, d});

  std::vector<S> carry(static_cast<size_t>(hs), S(0));
  std::vector<S> h_prev(static_cast<size_t>(hs));
  std::vector<S> rh(static_cast<size_t>(hs));
  std::vector<S> da_z(static_cast<size_t>(hs)), da_r(static_cast<size_t>(hs)),
      da_h(static_cast<size_t>(hs)), drh(static_cast<size_t>(hs));

  for (int t = t_len - 1; t >= 0; --t) {
    const S* xt = &inputs(t, 0);
    if (t == 0) {
      std::copy(h0.values.begin(), h0.values.end(), h_prev.begin());
    } else {
      for (int i = 0; i < hs; ++i) h_prev[i] = cache.h(t - 1, i);
    }

    // total gradient reaching h_t: external + recurrent carry
    for (int i = 0; i < hs; ++i) {
      const S dht = dh(t, i) + carry[i];
      const S zt = cache.z(t, i);
      const S hct = cache.hc(t, i);
      const S dz = dht * (hct - h_prev[i]);
      const S dhc = dht * zt;
      carry[i] = dht * (S(1) - zt);  // becomes dh_{t-1}, more added below
      da_h[i] = dhc * (S(1) - hct * hct);
      da_z[i] = dz * zt * (S(1) - zt);
      rh[i] = cache.r(t, i) * h_prev[i];
    }

    std::fill(drh.begin(), drh.end(), S(0));
    for (int i = 0; i < hs; ++i) {
      grads.b_h(i) += da_h[i];
      axpy(&grads.w_h(i, 0), xt, da_h[i], d);
      axpy(&grads.u_h(i, 0), rh.data(), da_h[i], hs);
      axpy(drh.data(), &cell.u_h(i, 0), da_h[i], hs);
      if (dinputs != nullptr) axpy(&(*dinputs)(t, 0), &cell.w_h(i, 0), da_h[i], d);
    }
    for (int i = 0; i < hs; ++i) {
      const S rt = cache.r(t, i);
      const S dr = drh[i] * h_prev[i];
      da_r[i] = dr * rt * (S(1) - rt);
      carry[i] += drh[i] * rt;
    }
    for (int i = 0; i < hs; ++i) {
      grads.b_z(i) += da_z[i];
      axpy(&grads.w_z(i, 0), xt, da_z[i], d);
      axpy(&grads.u_z(i, 0), h_prev.data(), da_z[i], hs);
      axpy(carry.data(), &cell.u_z(i, 0), da_z[i], hs);
      if (dinputs != nullptr) axpy(&(*dinputs)(t, 0), &cell.w_z(i, 0), da_z[i], d);

      grads.b_r(i) += da_r[i];
      axpy(&grads.w_r(i, 0), xt, da_r[i], d);
      axpy(&grads.u_r(i, 0), h_prev.data(), da_r[i], hs);
      axpy(carry.data(), &cell.u_r(i, 0), da_r[i], hs);
      if (dinputs != nullptr) axpy(&(*dinputs)(t, 0), &cell.w_r(i, 0), da_r[i], d);
    }
  }
}

namespace {

template <class S>
TensorT<S> reverse_time(const TensorT<S>& seq) {
  const int t_len = seq.dim(0);
  const int d = seq.dim(1);
  TensorT<S> out({t_len, d});
  for (int t = 0; t < t_len; ++t) {
    std::copy(&seq(t, 0), &seq(t, 0) + d, &out(t_len - 1 - t, 0));
  }
  return out;
}

}  // namespace

template <class S>
TensorT<S> bigru_forward(const GruCell<S>& fwd, const GruCell<S>& bwd,
                         const TensorT<S>& inputs, BiGruCache<S>* cache) {
  if (fwd.hidden != bwd.hidden || fwd.input_dim != bwd.input_dim) {
    throw std::invalid_argument("bigru: dimension mismatch");
  }
  const int t_len = inputs.dim(0);
  const int hs = fwd.hidden;
  TensorT<S> h0({hs});

  GruCache<S> cf, cb;
  TensorT<S> hf = gru_forward(fwd, inputs, h0, &cf);
  TensorT<S> rev = reverse_time(inputs);
  TensorT<S> hb = gru_forward(bwd, rev, h0, &cb);  // reversed time order

  TensorT<S> out({t_len, 2 * hs});
  for (int t = 0; t < t_len; ++t) {
    std::copy(&hf(t, 0), &hf(t, 0) + hs, &out(t, 0));
    std::copy(&hb(t_len - 1 - t, 0), &hb(t_len - 1 - t, 0) + hs, &out(t, hs));
  }
  if (cache != nullptr) {
    cache->fwd = std::move(cf);
    cache->bwd = std::move(cb);
  }
  return out;
}

template <class S>
void bigru_backward(const GruCell<S>& fwd, const GruCell<S>& bwd, const TensorT<S>& inputs,
                    const BiGruCache<S>& cache, const TensorT<S>& dh,
                    GruCell<S>& grads_fwd, GruCell<S>& grads_bwd, TensorT<S>* dinputs) {
  const int t_len = inputs.dim(0);
  const int hs = fwd.hidden;
  TensorT<S> h0({hs});

  TensorT<S> dh_f({t_len, hs});
  TensorT<S> dh_b({t_len, hs});  // in the bwd cell's (reversed) time order
  for (int t = 0; t < t_len; ++t) {
    for (int i = 0; i < hs; ++i) {
      dh_f(t, i) = dh(t, i);
      dh_b(t_len - 1 - t, i) = dh(t, hs + i);
    }
  }

  TensorT<S> din_f, din_b;
  gru_backward(fwd, inputs, h0, cache.fwd, dh_f, grads_fwd, dinputs != nullptr ? &din_f : nullptr);
  TensorT<S> rev = reverse_time(inputs);
  gru_backward(bwd, rev, h0, cache.bwd, dh_b, grads_bwd, dinputs != nullptr ? &din_b : nullptr);

  if (dinputs != nullptr) {
    TensorT<S> din_b_fwd = reverse_time(din_b);
    *dinputs = std::move(din_f);
    for (size_t i = 0; i < dinputs->values.size(); ++i) {
      dinputs->values[i] += din_b_fwd.values[i];
    }
  }
}

template <class S>
TensorT<S> stack_features(const TensorT<S>& conv_out) {
  const int ch = conv_out.dim(0);
  const int h = conv_out.dim(1);
  const int t_len = conv_out.dim(2);
  TensorT<S> out({t_len, ch * h});
  for (int c = 0; c < ch; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int t = 0; t < t_len; ++t) {
        out(t, c * h + y) = conv_out(c, y, t);
      }
    }
  }
  return out;
}

template <class S>
TensorT<S> stack_features_backward(const std::vector<int>& conv_shape, const TensorT<S>& dy) {
  TensorT<S> dx(conv_shape);
  const int ch = conv_shape[0];
  const int h = conv_shape[1];
  const int t_len = conv_shape[2];
  for (int c = 0; c < ch; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int t = 0; t < t_len; ++t) {
        dx(c, y, t) = dy(t, c * h + y);
      }
    }
  }
  return dx;
}

template <class S>
void init_uniform(TensorT<S>& t, int fan_in, Rng& rng) {
  // +-sqrt(3/fan_in) keeps unit variance gain through the layer; smaller
  // bounds stretch the early CTC plateau past what a desk-scale update
  // budget can absorb
  const double bound = std::sqrt(3.0 / fan_in);
  for (S& v : t.values) v = static_cast<S>(rng.uniform(-bound, bound));
}

#define TONEREC_INSTANTIATE(S)                                                            \
  template struct Conv2d<S>;                                                              \
  template struct Affine<S>;                                                              \
  template struct GruCell<S>;                                                             \
  template TensorT<S> conv2d_forward<S>(const TensorT<S>&, const Conv2d<S>&);             \
  template void conv2d_backward<S>(const TensorT<S>&, const Conv2d<S>&, const TensorT<S>&, \
                                   Conv2d<S>&, TensorT<S>*);                              \
  template TensorT<S> maxpool_forward<S>(const TensorT<S>&, MaxPoolCache*);               \
  template TensorT<S> maxpool_backward<S>(const MaxPoolCache&, const TensorT<S>&);        \
  template TensorT<S> relu<S>(const TensorT<S>&);                                         \
  template TensorT<S> relu_backward<S>(const TensorT<S>&, const TensorT<S>&);             \
  template TensorT<S> dropout<S>(const TensorT<S>&, double, bool, Rng&, TensorT<S>*);     \
  template TensorT<S> dropout_backward<S>(const TensorT<S>&, const TensorT<S>&);          \
  template TensorT<S> affine_forward<S>(const TensorT<S>&, const Affine<S>&);             \
  template void affine_backward<S>(const TensorT<S>&, const Affine<S>&, const TensorT<S>&, \
                                   Affine<S>&, TensorT<S>*);                              \
  template TensorT<S> gru_forward<S>(const GruCell<S>&, const TensorT<S>&,                \
                                     const TensorT<S>&, GruCache<S>*);                    \
  template void gru_backward<S>(const GruCell<S>&, const TensorT<S>&, const TensorT<S>&,  \
                                const GruCache<S>&, const TensorT<S>&, GruCell<S>&,       \
                                TensorT<S>*);                                             \
  template TensorT<S> bigru_forward<S>(const GruCell<S>&, const GruCell<S>&,              \
                                       const TensorT<S>&, BiGruCache<S>*);                \
  template void bigru_backward<S>(const GruCell<S>&, const GruCell<S>&, const TensorT<S>&, \
                                  const BiGruCache<S>&, const TensorT<S>&, GruCell<S>&,   \
                                  GruCell<S>&, TensorT<S>*);                              \
  template TensorT<S> stack_features<S>(const TensorT<S>&);                               \
  template TensorT<S> stack_features_backward<S>(const std::vector<int>&, const TensorT<S>&); \
  template void init_uniform<S>(TensorT<S>&, int, Rng&);

TONEREC_INSTANTIATE(float)
TONEREC_INSTANTIATE(double)

#undef TONEREC_INSTANTIATE

}  // namespace tonerec
