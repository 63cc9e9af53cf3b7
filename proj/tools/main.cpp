// tonerec command line: synthesize tonal speech, featurize, train, evaluate,
// decode, and inspect checkpoints.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tonerec/checkpoint.hpp"
#include "tonerec/config.hpp"
#include "tonerec/ctc.hpp"
#include "tonerec/metrics.hpp"
#include "tonerec/synth.hpp"
#include "tonerec/trainer.hpp"
#include "tonerec/wav.hpp"

namespace fs = std::filesystem;
using namespace tonerec;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

CliConfig resolve_config(const CommonOpts& common) {
  CliConfig cfg;
  if (!common.config_path.empty()) apply_config_file(common.config_path, cfg);
  if (common.seed_set) cfg.train.seed = common.seed;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& common) {
  cmd->add_option("--config", common.config_path, "key=value config file");
  cmd->add_option("--seed", common.seed, "random seed")
      ->each([&common](const std::string&) { common.seed_set = true; });
}

int run_synth(const CommonOpts& common, int n, const std::string& out_dir, int len_min,
              int len_max) {
  CliConfig cfg = resolve_config(common);
  generate_corpus(n, len_min, len_max, cfg.synth, cfg.train.seed, out_dir);
  std::printf("wrote %d utterances under %s\n", n, out_dir.c_str());
  return 0;
}

int run_featurize(const CommonOpts& common, const std::string& wav_path,
                  const std::string& out_path, const std::string& mode) {
  CliConfig cfg = resolve_config(common);
  if (!mode.empty()) cfg.frontend.mode = parse_frontend_mode(mode);
  AudioSignal sig = load_wav(wav_path);
  Cepstrogram gram = featurize(sig, cfg.frontend);
  write_pgm(gram, out_path);
  std::printf("%s: %d frames x %d bins -> %s\n", wav_path.c_str(), gram.num_frames,
              gram.num_bins, out_path.c_str());
  return 0;
}

TrainSet load_set(const std::string& manifest_path, const CliConfig& cfg) {
  Manifest manifest = load_manifest(manifest_path);
  const std::string dir = fs::path(manifest_path).parent_path().string();
  return build_train_set(manifest, dir.empty() ? "." : dir, cfg.frontend,
                         cfg.synth.sample_rate, cfg.train.threads);
}

int run_train(const CommonOpts& common, const std::string& train_manifest,
              const std::string& dev_manifest, const std::string& out_dir, int epochs,
              int threads) {
  CliConfig cfg = resolve_config(common);
  if (epochs > 0) cfg.train.epochs = epochs;
  if (threads >= 0) cfg.train.threads = threads;

  TrainSet train_set = load_set(train_manifest, cfg);
  TrainSet dev_set = load_set(dev_manifest, cfg);
  if (train_set.empty() || dev_set.empty()) {
    std::fprintf(stderr, "error: empty train or dev manifest\n");
    return 1;
  }

  const int bins = train_set.front().features.num_bins;
  ToneNet<float> model = ToneNet<float>::init(cfg.model, bins, cfg.train.seed);
  try {
    TrainLog log = fit(model, train_set, dev_set, cfg.train, out_dir);
    std::printf("best epoch %d (%s)\n", log.best_epoch, log.best_path.c_str());
  } catch (const TrainDivergedError& e) {
    std::fprintf(stderr, "error: training diverged after %zu epochs (partial log kept)\n",
                 e.partial_log.epochs.size());
    return 1;
  }
  return 0;
}

int run_eval(const CommonOpts& common, const std::string& ckpt_path,
             const std::string& manifest_path, const std::string& decoder, int beam_width) {
  CliConfig cfg = resolve_config(common);
  ToneNet<float> model = load_checkpoint(ckpt_path);
  TrainSet set = load_set(manifest_path, cfg);

  std::vector<std::pair<ToneSequence, ToneSequence>> pairs(set.size());
  parallel_for(static_cast<int>(set.size()), cfg.train.threads, [&](int i) {
    Tensor logits = model.forward(set[i].features, false, nullptr, nullptr);
    ToneSequence hyp = decoder == "beam" ? beam_decode(logits, beam_width)
                                         : greedy_decode(logits);
    pairs[i] = {std::move(hyp), set[i].tones};
  });
  std::fputs(render_report(evaluate_pairs(pairs)).c_str(), stdout);
  return 0;
}

int run_decode(const CommonOpts& common, const std::string& ckpt_path,
               const std::string& wav_path, const std::string& decoder, int beam_width) {
  CliConfig cfg = resolve_config(common);
  ToneNet<float> model = load_checkpoint(ckpt_path);
  AudioSignal sig = load_wav(wav_path);
  Cepstrogram gram = featurize(sig, cfg.frontend);
  Tensor logits = model.forward(gram, false, nullptr, nullptr);
  ToneSequence tones = decoder == "beam" ? beam_decode(logits, beam_width)
                                         : greedy_decode(logits);
  for (size_t i = 0; i < tones.size(); ++i) {
    std::printf("%s%d", i > 0 ? " " : "", tones[i]);
  }
  std::printf("\n");
  return 0;
}

int run_inspect(const std::string& ckpt_path) {
  for (const auto& [name, shape] : inspect_checkpoint(ckpt_path)) {
    std::printf("%-16s", name.c_str());
    for (size_t i = 0; i < shape.size(); ++i) {
      std::printf("%s%d", i > 0 ? " x " : " ", shape[i]);
    }
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cepstrogram -> CNN -> BiGRU -> CTC tone recognizer"};
  app.require_subcommand(1);

  CommonOpts common;

  auto* synth = app.add_subcommand("synth", "generate a synthetic tonal corpus");
  int synth_n = 0;
  std::string synth_out;
  int len_min = 2;
  int len_max = 6;
  synth->add_option("--n", synth_n, "number of utterances")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--len-min", len_min, "min tones per utterance");
  synth->add_option("--len-max", len_max, "max tones per utterance");
  add_common(synth, common);

  auto* feat = app.add_subcommand("featurize", "write a feature map as PGM");
  std::string feat_wav, feat_out, feat_mode;
  feat->add_option("--wav", feat_wav, "input wav")->required();
  feat->add_option("--out", feat_out, "output pgm")->required();
  feat->add_option("--mode", feat_mode, "cepstrogram|spectrogram|high_time");
  add_common(feat, common);

  auto* train = app.add_subcommand("train", "train a recognizer");
  std::string train_manifest, dev_manifest, train_out;
  int train_epochs = 0;
  int train_threads = -1;
  train->add_option("--train", train_manifest, "training manifest")->required();
  train->add_option("--dev", dev_manifest, "dev manifest")->required();
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--epochs", train_epochs, "override epoch count");
  train->add_option("--threads", train_threads, "worker threads (0 = auto)");
  add_common(train, common);

  auto* eval = app.add_subcommand("eval", "score a checkpoint against a manifest");
  std::string eval_ckpt, eval_manifest, eval_decoder = "greedy";
  int eval_beam = 64;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--manifest", eval_manifest, "test manifest")->required();
  eval->add_option("--decoder", eval_decoder, "greedy|beam")
      ->check(CLI::IsMember({"greedy", "beam"}));
  eval->add_option("--beam-width", eval_beam, "beam width for --decoder beam");
  add_common(eval, common);

  auto* decode = app.add_subcommand("decode", "print the tone sequence of one wav");
  std::string dec_ckpt, dec_wav, dec_decoder = "greedy";
  int dec_beam = 64;
  decode->add_option("--checkpoint", dec_ckpt, "checkpoint file")->required();
  decode->add_option("--wav", dec_wav, "input wav")->required();
  decode->add_option("--decoder", dec_decoder, "greedy|beam")
      ->check(CLI::IsMember({"greedy", "beam"}));
  decode->add_option("--beam-width", dec_beam, "beam width for --decoder beam");
  add_common(decode, common);

  auto* inspect = app.add_subcommand("inspect", "list checkpoint tensors");
  std::string inspect_ckpt;
  inspect->add_option("--checkpoint", inspect_ckpt, "checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(common, synth_n, synth_out, len_min, len_max);
    if (feat->parsed()) return run_featurize(common, feat_wav, feat_out, feat_mode);
    if (train->parsed()) {
      return run_train(common, train_manifest, dev_manifest, train_out, train_epochs,
                       train_threads);
    }
    if (eval->parsed()) return run_eval(common, eval_ckpt, eval_manifest, eval_decoder, eval_beam);
    if (decode->parsed()) return run_decode(common, dec_ckpt, dec_wav, dec_decoder, dec_beam);
    if (inspect->parsed()) return run_inspect(inspect_ckpt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
