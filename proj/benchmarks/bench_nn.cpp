#include <benchmark/benchmark.h>

#include "tonerec/nn.hpp"
#include "tonerec/rng.hpp"

using namespace tonerec;

namespace {

template <class S>
Conv2d<S> random_conv(int out_ch, int in_ch, Rng& rng) {
  Conv2d<S> conv = Conv2d<S>::make(out_ch, in_ch);
  init_uniform(conv.kernels, in_ch * kConvKernel * kConvKernel, rng);
  init_uniform(conv.bias, in_ch * kConvKernel * kConvKernel, rng);
  return conv;
}

template <class S>
TensorT<S> random_tensor(std::vector<int> shape, Rng& rng) {
  TensorT<S> t(std::move(shape));
  for (S& v : t.values) v = static_cast<S>(rng.uniform(-1.0, 1.0));
  return t;
}

// conv2's shape for a ~1.5 s utterance
void ConvForward(benchmark::State& state) {
  Rng rng(1);
  const int h = 122;
  const int w = static_cast<int>(state.range(0));
  Conv2d<float> conv = random_conv<float>(16, 16, rng);
  Tensor x = random_tensor<float>({16, h, w}, rng);
  for (auto _ : state) {
    Tensor y = conv2d_forward(x, conv);
    benchmark::DoNotOptimize(y.values.data());
  }
  const double macs = 16.0 * 16.0 * 121.0 * (h - 10) * (w - 10);
  state.counters["GFLOP/s"] =
      benchmark::Counter(2e-9 * macs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(ConvForward)->Arg(64)->Arg(128);

void ConvBackward(benchmark::State& state) {
  Rng rng(1);
  const int h = 122;
  const int w = static_cast<int>(state.range(0));
  Conv2d<float> conv = random_conv<float>(16, 16, rng);
  Tensor x = random_tensor<float>({16, h, w}, rng);
  Tensor dy = random_tensor<float>({16, h - 10, w - 10}, rng);
  Conv2d<float> grads = Conv2d<float>::make(16, 16);
  for (auto _ : state) {
    Tensor dx;
    conv2d_backward(x, conv, dy, grads, &dx);
    benchmark::DoNotOptimize(dx.values.data());
  }
  const double macs = 3.0 * 16.0 * 16.0 * 121.0 * (h - 10) * (w - 10);
  state.counters["GFLOP/s"] =
      benchmark::Counter(2e-9 * macs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(ConvBackward)->Arg(64)->Arg(128);

void GruForward(benchmark::State& state) {
  Rng rng(1);
  GruCell<float> cell = GruCell<float>::make(336, 128);
  for (TensorT<float>* t : {&cell.w_z, &cell.u_z, &cell.w_r, &cell.u_r, &cell.w_h, &cell.u_h}) {
    init_uniform(*t, 336, rng);
  }
  Tensor inputs = random_tensor<float>({16, 336}, rng);
  Tensor h0({128});
  for (auto _ : state) {
    Tensor h = gru_forward<float>(cell, inputs, h0, nullptr);
    benchmark::DoNotOptimize(h.values.data());
  }
}
BENCHMARK(GruForward);

}  // namespace
