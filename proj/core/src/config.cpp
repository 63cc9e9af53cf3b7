#include "tonerec/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

namespace tonerec {

FrontendMode parse_frontend_mode(const std::string& name) {
  if (name == "cepstrogram") return FrontendMode::kCepstrogram;
  if (name == "spectrogram") return FrontendMode::kSpectrogram;
  if (name == "high_time") return FrontendMode::kHighTimeCepstrogram;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected cepstrogram|spectrogram|high_time)");
}

std::string frontend_mode_name(FrontendMode mode) {
  switch (mode) {
    case FrontendMode::kCepstrogram: return "cepstrogram";
    case FrontendMode::kSpectrogram: return "spectrogram";
    case FrontendMode::kHighTimeCepstrogram: return "high_time";
  }
  return "?";
}

namespace {

double to_double(const std::string& v) {
  size_t pos = 0;
  double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad number '" + v + "'");
  return d;
}

int to_int(const std::string& v) {
  size_t pos = 0;
  long l = std::stol(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad integer '" + v + "'");
  return static_cast<int>(l);
}

std::uint64_t to_u64(const std::string& v) {
  size_t pos = 0;
  unsigned long long l = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad integer '" + v + "'");
  return static_cast<std::uint64_t>(l);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("bad boolean '" + v + "' (expected true|false)");
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Setter = std::function<void(const std::string&, CliConfig&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    // frontend
    t["frame_len_ms"] = [](const std::string& v, CliConfig& c) { c.frontend.frame_len_ms = to_double(v); };
    t["hop_ms"] = [](const std::string& v, CliConfig& c) { c.frontend.hop_ms = to_double(v); };
    t["fft_len"] = [](const std::string& v, CliConfig& c) { c.frontend.fft_len = to_int(v); };
    t["mode"] = [](const std::string& v, CliConfig& c) { c.frontend.mode = parse_frontend_mode(v); };
    t["lifter_cut"] = [](const std::string& v, CliConfig& c) { c.frontend.lifter_cut = to_int(v); };
    t["quefrency_bins"] = [](const std::string& v, CliConfig& c) { c.frontend.quefrency_bins = to_int(v); };
    t["log_floor"] = [](const std::string& v, CliConfig& c) { c.frontend.log_floor = to_double(v); };
    t["normalize"] = [](const std::string& v, CliConfig& c) { c.frontend.normalize = to_bool(v); };
    // model
    t["conv_channels"] = [](const std::string& v, CliConfig& c) { c.model.conv_channels = to_int(v); };
    t["hidden"] = [](const std::string& v, CliConfig& c) { c.model.hidden = to_int(v); };
    t["dropout_rate"] = [](const std::string& v, CliConfig& c) { c.model.dropout_rate = to_double(v); };
    // train
    t["epochs"] = [](const std::string& v, CliConfig& c) { c.train.epochs = to_int(v); };
    t["lr0"] = [](const std::string& v, CliConfig& c) { c.train.lr0 = to_double(v); };
    t["beta1"] = [](const std::string& v, CliConfig& c) { c.train.beta1 = to_double(v); };
    t["beta2"] = [](const std::string& v, CliConfig& c) { c.train.beta2 = to_double(v); };
    t["eps"] = [](const std::string& v, CliConfig& c) { c.train.eps = to_double(v); };
    t["clip_norm"] = [](const std::string& v, CliConfig& c) { c.train.clip_norm = to_double(v); };
    t["batch_size"] = [](const std::string& v, CliConfig& c) { c.train.batch_size = to_int(v); };
    t["seed"] = [](const std::string& v, CliConfig& c) { c.train.seed = to_u64(v); };
    t["threads"] = [](const std::string& v, CliConfig& c) { c.train.threads = to_int(v); };
    t["lr_halving"] = [](const std::string& v, CliConfig& c) { c.train.lr_halving = to_bool(v); };
    // synth
    t["sample_rate"] = [](const std::string& v, CliConfig& c) { c.synth.sample_rate = to_int(v); };
    t["base_f0_min"] = [](const std::string& v, CliConfig& c) { c.synth.base_f0_min = to_double(v); };
    t["base_f0_max"] = [](const std::string& v, CliConfig& c) { c.synth.base_f0_max = to_double(v); };
    t["syl_dur_min"] = [](const std::string& v, CliConfig& c) { c.synth.syl_dur_min = to_double(v); };
    t["syl_dur_max"] = [](const std::string& v, CliConfig& c) { c.synth.syl_dur_max = to_double(v); };
    t["gap_min"] = [](const std::string& v, CliConfig& c) { c.synth.gap_min = to_double(v); };
    t["gap_max"] = [](const std::string& v, CliConfig& c) { c.synth.gap_max = to_double(v); };
    t["lead_trail"] = [](const std::string& v, CliConfig& c) { c.synth.lead_trail = to_double(v); };
    t["noise_level"] = [](const std::string& v, CliConfig& c) { c.synth.noise_level = to_double(v); };
    t["formant1_hz"] = [](const std::string& v, CliConfig& c) { c.synth.formant1_hz = to_double(v); };
    t["formant2_hz"] = [](const std::string& v, CliConfig& c) { c.synth.formant2_hz = to_double(v); };
    t["formant_bw_hz"] = [](const std::string& v, CliConfig& c) { c.synth.formant_bw_hz = to_double(v); };
    t["pad_for_model"] = [](const std::string& v, CliConfig& c) { c.synth.pad_for_model = to_bool(v); };
    for (int tone = 0; tone < kNumTones; ++tone) {
      const std::string prefix = "tone" + std::to_string(tone) + "_";
      t[prefix + "start"] = [tone](const std::string& v, CliConfig& c) { c.synth.contours[tone].start = to_double(v); };
      t[prefix + "mid"] = [tone](const std::string& v, CliConfig& c) { c.synth.contours[tone].mid = to_double(v); };
      t[prefix + "end"] = [tone](const std::string& v, CliConfig& c) { c.synth.contours[tone].end = to_double(v); };
      t[prefix + "dur_scale"] = [tone](const std::string& v, CliConfig& c) { c.synth.contours[tone].duration_scale = to_double(v); };
    }
    return t;
  }();
  return table;
}

}  // namespace

void apply_config_entry(const std::string& key, const std::string& value, CliConfig& cfg) {
  auto it = setters().find(key);
  if (it == setters().end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second(value, cfg);
}

void apply_config_file(const std::string& path, CliConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(key, value, cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace tonerec
