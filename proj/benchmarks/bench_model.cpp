#include <benchmark/benchmark.h>

#include "tonerec/ctc.hpp"
#include "tonerec/model.hpp"
#include "tonerec/rng.hpp"
#include "tonerec/synth.hpp"

using namespace tonerec;

namespace {

Cepstrogram typical_features() {
  Rng rng(11);
  SynthConfig scfg;
  AudioSignal sig = synth_utterance({1, 4, 2, 0}, scfg, rng);
  return featurize(sig, FrontendConfig{});
}

void ModelForward(benchmark::State& state) {
  Cepstrogram feat = typical_features();
  ToneNet<float> model = ToneNet<float>::init(ModelConfig{}, feat.num_bins, 1);
  for (auto _ : state) {
    Tensor logits = model.forward(feat, false, nullptr, nullptr);
    benchmark::DoNotOptimize(logits.values.data());
  }
  state.counters["frames"] = feat.num_frames;
}
BENCHMARK(ModelForward);

// one full training step for one utterance: forward, CTC, backward
void ModelTrainStep(benchmark::State& state) {
  Cepstrogram feat = typical_features();
  ToneNet<float> model = ToneNet<float>::init(ModelConfig{}, feat.num_bins, 1);
  ModelParams<float> grads = zeros_like(model.params);
  ToneSequence labels = {1, 4, 2, 0};
  Rng rng(2);
  for (auto _ : state) {
    ModelCache<float> cache;
    Tensor logits = model.forward(feat, true, &rng, &cache);
    CtcLoss<float> loss = ctc_loss(logits, labels);
    model.backward(cache, loss.logit_grads, grads);
    benchmark::DoNotOptimize(grads.conv1.kernels.values.data());
  }
  state.counters["frames"] = feat.num_frames;
}
BENCHMARK(ModelTrainStep);

}  // namespace
