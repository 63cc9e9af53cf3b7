#include "tonerec/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "tonerec/checkpoint.hpp"
#include "tonerec/ctc.hpp"
#include "tonerec/optim.hpp"
#include "tonerec/wav.hpp"

namespace tonerec {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(lr0 > 0.0)) throw std::invalid_argument("lr0 must be positive");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw std::invalid_argument("adam betas must be in [0,1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

std::vector<int> sortagrad_order(const std::vector<int>& utterance_lengths, int epoch,
                                 std::uint64_t seed) {
  if (epoch < 1) throw std::invalid_argument("epoch must be >= 1");
  const int n = static_cast<int>(utterance_lengths.size());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (epoch == 1) {
    std::stable_sort(order.begin(), order.end(), [&utterance_lengths](int a, int b) {
      return utterance_lengths[a] < utterance_lengths[b];
    });
  } else {
    Rng rng(mix_seed(seed, 0x5047 + static_cast<std::uint64_t>(epoch)));
    for (int i = n - 1; i > 0; --i) {
      const int j = rng.uniform_int(0, i);
      std::swap(order[i], order[j]);
    }
  }
  return order;
}

std::string format_epoch_line(const EpochStats& stats) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "epoch=%d train_loss=%.6f dev_loss=%.6f lr=%.8g",
                stats.epoch, stats.train_loss, stats.dev_loss, stats.lr);
  return buf;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads == 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double mean_ctc_loss(const ToneNet<float>& model, const TrainSet& set, int threads) {
  if (set.empty()) throw std::invalid_argument("empty dataset");
  std::vector<double> losses(set.size());
  parallel_for(static_cast<int>(set.size()), threads, [&](int i) {
    Tensor logits = model.forward(set[i].features, false, nullptr, nullptr);
    losses[i] = ctc_loss(logits, set[i].tones).loss;
  });
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(set.size());
}

namespace {

void zero_params(ModelParams<float>& p) {
  for (auto& nt : named_tensors(p)) nt.tensor->fill(0.0f);
}

std::vector<TensorT<float>*> tensor_ptrs(ModelParams<float>& p) {
  std::vector<TensorT<float>*> out;
  for (auto& nt : named_tensors(p)) out.push_back(nt.tensor);
  return out;
}

}  // namespace

TrainLog fit(ToneNet<float>& model, const TrainSet& train, const TrainSet& dev,
             const TrainConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  if (train.empty() || dev.empty()) {
    throw std::invalid_argument("train and dev sets must be nonempty");
  }
  fs::create_directories(out_dir);
  std::ofstream log_file(fs::path(out_dir) / "train.log");
  if (!log_file) throw std::runtime_error("cannot open train.log under " + out_dir);

  std::vector<int> lengths;
  lengths.reserve(train.size());
  for (const TrainUtterance& u : train) lengths.push_back(u.features.num_frames);

  std::vector<TensorT<float>*> params = tensor_ptrs(model.params);
  AdamState<float> adam = AdamState<float>::init_like(params);

  // one gradient buffer per batch slot, reduced in slot order
  std::vector<ModelParams<float>> slot_grads;
  slot_grads.reserve(static_cast<size_t>(cfg.batch_size));
  for (int i = 0; i < cfg.batch_size; ++i) slot_grads.push_back(zeros_like(model.params));
  ModelParams<float> batch_grads = zeros_like(model.params);
  std::vector<TensorT<float>*> grad_ptrs = tensor_ptrs(batch_grads);
  std::vector<const TensorT<float>*> grad_cptrs(grad_ptrs.begin(), grad_ptrs.end());

  TrainLog log;
  double lr = cfg.lr0;
  double prev_dev = 0.0;
  double best_dev = 0.0;
  const int n_train = static_cast<int>(train.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<int> order = sortagrad_order(lengths, epoch, cfg.seed);
    double loss_sum = 0.0;

    for (int start = 0; start < n_train; start += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n_train - start);
      std::vector<double> losses(static_cast<size_t>(count));

      parallel_for(count, cfg.threads, [&](int slot) {
        const int utt = order[static_cast<size_t>(start) + slot];
        zero_params(slot_grads[slot]);
        Rng rng(mix_seed(cfg.seed, (static_cast<std::uint64_t>(epoch) << 32) |
                                       static_cast<std::uint64_t>(utt)));
        ModelCache<float> cache;
        Tensor logits = model.forward(train[utt].features, true, &rng, &cache);
        CtcLoss<float> ctc = ctc_loss(logits, train[utt].tones);
        losses[slot] = ctc.loss;
        if (!std::isfinite(ctc.loss)) return;
        model.backward(cache, ctc.logit_grads, slot_grads[slot]);
      });

      for (double l : losses) {
        if (!std::isfinite(l)) throw TrainDivergedError(log);
        loss_sum += l;
      }

      zero_params(batch_grads);
      for (int slot = 0; slot < count; ++slot) accumulate(batch_grads, slot_grads[slot]);
      scale(batch_grads, 1.0f / static_cast<float>(count));
      clip_gradients(grad_ptrs, cfg.clip_norm);
      try {
        adam_step(params, grad_cptrs, adam, lr, cfg.beta1, cfg.beta2, cfg.eps);
      } catch (const std::runtime_error&) {
        throw TrainDivergedError(log);
      }
    }

    const double train_loss = loss_sum / n_train;
    const double dev_loss = mean_ctc_loss(model, dev, cfg.threads);
    if (!std::isfinite(train_loss) || !std::isfinite(dev_loss)) {
      throw TrainDivergedError(log);
    }
    if (cfg.lr_halving && epoch >= 2 && dev_loss > prev_dev) lr *= 0.5;
    prev_dev = dev_loss;

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = train_loss;
    stats.dev_loss = dev_loss;
    stats.lr = lr;
    stats.order = std::move(order);
    log_file << format_epoch_line(stats) << '\n';
    log_file.flush();
    log.epochs.push_back(std::move(stats));

    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%03d.ckpt", epoch);
    save_checkpoint((fs::path(out_dir) / name).string(), model);

    if (log.best_epoch == 0 || dev_loss < best_dev) {
      best_dev = dev_loss;
      log.best_epoch = epoch;
    }
  }

  char best_name[32];
  std::snprintf(best_name, sizeof(best_name), "epoch_%03d.ckpt", log.best_epoch);
  const fs::path best_link = fs::path(out_dir) / "best.ckpt";
  std::error_code ec;
  fs::remove(best_link, ec);
  fs::create_symlink(best_name, best_link, ec);
  if (ec) fs::copy_file(fs::path(out_dir) / best_name, best_link);
  log.best_path = best_link.string();
  return log;
}

TrainSet build_train_set(const Manifest& manifest, const std::string& manifest_dir,
                         const FrontendConfig& fcfg, int expected_rate, int threads) {
  TrainSet set(manifest.entries.size());
  parallel_for(static_cast<int>(manifest.entries.size()), threads, [&](int i) {
    const ManifestEntry& e = manifest.entries[static_cast<size_t>(i)];
    AudioSignal sig = load_wav((fs::path(manifest_dir) / e.audio_path).string(), expected_rate);
    set[static_cast<size_t>(i)] = {e.id, featurize(sig, fcfg), e.tones};
  });
  return set;
}

}  // namespace tonerec
