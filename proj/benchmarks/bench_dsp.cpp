#include <benchmark/benchmark.h>

#include "tonerec/dsp.hpp"
#include "tonerec/rng.hpp"

using namespace tonerec;

namespace {

AudioSignal noise_signal(int seconds) {
  Rng rng(42);
  AudioSignal sig;
  sig.sample_rate = 16000;
  sig.samples.resize(static_cast<size_t>(seconds) * 16000);
  for (float& v : sig.samples) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  return sig;
}

void Featurize(benchmark::State& state) {
  AudioSignal sig = noise_signal(static_cast<int>(state.range(0)));
  FrontendConfig cfg;
  for (auto _ : state) {
    Cepstrogram gram = featurize(sig, cfg);
    benchmark::DoNotOptimize(gram.data.data());
  }
  state.counters["frames/s"] = benchmark::Counter(
      frame_count(static_cast<int>(sig.samples.size()), 400, 160),
      benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(Featurize)->Arg(1)->Arg(4);

void CepstrumFrame(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> frame(400);
  for (double& v : frame) v = rng.uniform(-0.5, 0.5);
  FrontendConfig cfg;
  for (auto _ : state) {
    std::vector<double> c = cepstrum(frame, cfg);
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(CepstrumFrame);

}  // namespace
