#include <benchmark/benchmark.h>

#include "tonerec/ctc.hpp"
#include "tonerec/rng.hpp"

using namespace tonerec;

namespace {

Tensor random_logits(int t_len, Rng& rng) {
  Tensor logits({t_len, kNumClasses});
  for (float& v : logits.values) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  return logits;
}

void CtcLossGrad(benchmark::State& state) {
  Rng rng(3);
  Tensor logits = random_logits(static_cast<int>(state.range(0)), rng);
  ToneSequence labels = {1, 3, 0, 2, 4, 1};
  for (auto _ : state) {
    CtcLoss<float> l = ctc_loss(logits, labels);
    benchmark::DoNotOptimize(l.loss);
  }
}
BENCHMARK(CtcLossGrad)->Arg(16)->Arg(64);

void BeamDecode(benchmark::State& state) {
  Rng rng(5);
  Tensor logits = random_logits(16, rng);
  for (auto _ : state) {
    ToneSequence seq = beam_decode(logits, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(seq.data());
  }
}
BENCHMARK(BeamDecode)->Arg(1)->Arg(64);

}  // namespace
