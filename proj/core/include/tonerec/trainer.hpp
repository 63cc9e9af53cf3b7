#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tonerec/manifest.hpp"
#include "tonerec/model.hpp"

namespace tonerec {

struct TrainConfig {
  int epochs = 20;
  double lr0 = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;
  int batch_size = 16;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  // halve the lr when the dev loss rises; off turns fit into the plain
  // fixed-rate loop used by the overfit smoke test
  bool lr_halving = true;
  void validate() const;
};

struct TrainUtterance {
  std::string id;
  Cepstrogram features;
  ToneSequence tones;
};

using TrainSet = std::vector<TrainUtterance>;

struct EpochStats {
  int epoch = 0;          // 1-based
  double train_loss = 0;  // mean CTC loss per utterance
  double dev_loss = 0;
  double lr = 0;  // in effect after this epoch's halving decision
  std::vector<int> order;  // utterance visit order this epoch
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // lowest dev loss, 1-based
  std::string best_path;
};

class TrainDivergedError : public std::runtime_error {
 public:
  explicit TrainDivergedError(TrainLog partial)
      : std::runtime_error("diverged"), partial_log(std::move(partial)) {}
  TrainLog partial_log;
};

// Epoch 1: indices sorted ascending by length (ties by index). Later epochs:
// uniform shuffle seeded by (seed, epoch).
std::vector<int> sortagrad_order(const std::vector<int>& utterance_lengths, int epoch,
                                 std::uint64_t seed);

std::string format_epoch_line(const EpochStats& stats);

// Deterministic regardless of scheduling: fn(i) writes only to slot i.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

double mean_ctc_loss(const ToneNet<float>& model, const TrainSet& set, int threads);

// Adam + gradient clipping + dev-loss-triggered LR halving + SortaGrad.
// Writes epoch_NNN.ckpt per epoch, a best.ckpt symref, and train.log under
// out_dir. Non-finite losses abort with the partial log attached.
TrainLog fit(ToneNet<float>& model, const TrainSet& train, const TrainSet& dev,
             const TrainConfig& cfg, const std::string& out_dir);

// Load + featurize every manifest entry (paths relative to manifest_dir).
TrainSet build_train_set(const Manifest& manifest, const std::string& manifest_dir,
                         const FrontendConfig& fcfg, int expected_rate, int threads);

}  // namespace tonerec
