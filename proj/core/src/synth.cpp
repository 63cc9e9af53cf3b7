#include "tonerec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "tonerec/nn.hpp"
#include "tonerec/wav.hpp"

namespace tonerec {

namespace {

// matches the FrontendConfig defaults (25 ms / 10 ms)
constexpr double kFrameSec = 0.025;
constexpr double kHopSec = 0.010;

double contour_mult(const ToneContour& c, double t01) {
  return t01 < 0.5 ? c.start + (c.mid - c.start) * (t01 / 0.5)
                   : c.mid + (c.end - c.mid) * ((t01 - 0.5) / 0.5);
}

// two-pole resonator, poles at r*exp(+-i*2*pi*f/sr)
struct Resonator {
  double a1, a2, y1 = 0.0, y2 = 0.0;
  Resonator(double f_hz, double bw_hz, int sr) {
    const double r = std::exp(-M_PI * bw_hz / sr);
    a1 = 2.0 * r * std::cos(2.0 * M_PI * f_hz / sr);
    a2 = -r * r;
  }
  double step(double x) {
    const double y = x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

std::vector<double> synth_syllable(int tone, double base_f0, const SynthConfig& cfg,
                                   Rng& rng) {
  const ToneContour& contour = cfg.contours[tone];
  const double dur = rng.uniform(cfg.syl_dur_min, cfg.syl_dur_max) * contour.duration_scale;
  const double jitter = rng.uniform(0.98, 1.02);
  const int n = std::max(2, static_cast<int>(std::lround(dur * cfg.sample_rate)));

  std::vector<double> excitation(static_cast<size_t>(n), 0.0);
  double phase = 1.0;  // pulse on the first voiced sample
  for (int i = 0; i < n; ++i) {
    const double t01 = static_cast<double>(i) / (n - 1);
    const double f0 = base_f0 * jitter * contour_mult(contour, t01);
    phase += f0 / cfg.sample_rate;
    if (phase >= 1.0) {
      phase -= 1.0;
      excitation[i] = 1.0;
    }
  }

  Resonator r1(cfg.formant1_hz, cfg.formant_bw_hz, cfg.sample_rate);
  Resonator r2(cfg.formant2_hz, cfg.formant_bw_hz, cfg.sample_rate);
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = r2.step(r1.step(excitation[i]));

  // attack/release envelope; the level additionally tracks the F0 contour,
  // a crude stand-in for the loudness correlates of real tone production
  const int attack = std::max(1, n * 15 / 100);
  const int release = std::max(1, n * 20 / 100);
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t01 = static_cast<double>(i) / (n - 1);
    double env = 1.0;
    if (i < attack) env = 0.5 - 0.5 * std::cos(M_PI * i / attack);
    if (i >= n - release) env *= 0.5 - 0.5 * std::cos(M_PI * (n - 1 - i) / release);
    const double mult = contour_mult(contour, t01);
    const double level = 0.6 + 0.4 * std::clamp((mult - 0.7) / 0.5, 0.0, 1.0);
    out[i] *= env * level;
    peak = std::max(peak, std::abs(out[i]));
  }
  if (peak > 0.0) {
    const double norm = 0.7 / peak;
    for (double& v : out) v *= norm;
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  if (!(base_f0_min > 0.0) || base_f0_max < base_f0_min) {
    throw std::invalid_argument("bad base_f0 range");
  }
  if (!(syl_dur_min > 0.0) || syl_dur_max < syl_dur_min) {
    throw std::invalid_argument("bad syllable duration range");
  }
  if (gap_min < 0.0 || gap_max < gap_min) throw std::invalid_argument("bad gap range");
  if (lead_trail < 0.0) throw std::invalid_argument("lead_trail must be >= 0");
  if (noise_level < 0.0) throw std::invalid_argument("noise_level must be >= 0");
  double mult_lo = 10.0;
  double mult_hi = 0.0;
  double min_dur_scale = 1.0;
  for (const ToneContour& c : contours) {
    for (double m : {c.start, c.mid, c.end}) {
      mult_lo = std::min(mult_lo, m);
      mult_hi = std::max(mult_hi, m);
    }
    if (!(c.duration_scale > 0.0)) throw std::invalid_argument("bad duration_scale");
    min_dur_scale = std::min(min_dur_scale, c.duration_scale);
  }
  // jitter extends the range by 2%
  if (base_f0_min * mult_lo * 0.98 < 60.0 || base_f0_max * mult_hi * 1.02 > 400.0) {
    throw std::invalid_argument("contours leave the 60..400 Hz F0 range");
  }
  if (syl_dur_min * min_dur_scale < kFrameSec + 2.0 * kHopSec) {
    throw std::invalid_argument("syllables must span more than two frames");
  }
}

AudioSignal synth_utterance(const ToneSequence& tones, const SynthConfig& cfg, Rng& rng) {
  if (tones.empty()) throw std::invalid_argument("tone sequence must be nonempty");
  if (!valid_tone_sequence(tones)) throw std::invalid_argument("invalid tone label");
  cfg.validate();

  const int sr = cfg.sample_rate;
  const double base_f0 = rng.uniform(cfg.base_f0_min, cfg.base_f0_max);
  const int lead = static_cast<int>(std::lround(cfg.lead_trail * sr));

  std::vector<double> samples(static_cast<size_t>(lead), 0.0);
  for (size_t u = 0; u < tones.size(); ++u) {
    if (u > 0) {
      const int gap = static_cast<int>(std::lround(rng.uniform(cfg.gap_min, cfg.gap_max) * sr));
      samples.insert(samples.end(), static_cast<size_t>(gap), 0.0);
    }
    std::vector<double> syl = synth_syllable(tones[u], base_f0, cfg, rng);
    samples.insert(samples.end(), syl.begin(), syl.end());
  }
  samples.insert(samples.end(), static_cast<size_t>(lead), 0.0);

  if (cfg.pad_for_model) {
    int repeats = 0;
    for (size_t u = 1; u < tones.size(); ++u) {
      if (tones[u] == tones[u - 1]) ++repeats;
    }
    const int needed_steps = std::max(static_cast<int>(tones.size()) + repeats + 2, 4);
    const int frame = static_cast<int>(std::lround(kFrameSec * sr));
    const int hop = static_cast<int>(std::lround(kHopSec * sr));
    const int needed_frames = min_frames_for_steps(needed_steps);
    const size_t needed_samples = static_cast<size_t>(needed_frames - 1) * hop + frame;
    if (samples.size() < needed_samples) samples.resize(needed_samples, 0.0);
  }

  if (cfg.noise_level > 0.0) {
    for (double& v : samples) v += cfg.noise_level * rng.normal();
  }

  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.99 ? 0.99 / peak : 1.0;

  AudioSignal sig;
  sig.sample_rate = sr;
  sig.samples.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    sig.samples[i] = static_cast<float>(samples[i] * scale);
  }
  return sig;
}

std::vector<ToneSequence> draw_tone_sequences(int n, int len_min, int len_max, Rng& rng) {
  if (n < 1 || len_min < 1 || len_max < len_min) {
    throw std::invalid_argument("bad corpus size or length range");
  }
  std::vector<ToneSequence> out(static_cast<size_t>(n));
  for (ToneSequence& seq : out) {
    const int len = rng.uniform_int(len_min, len_max);
    seq.resize(static_cast<size_t>(len));
    for (int& t : seq) t = rng.uniform_int(0, kNumTones - 1);
  }
  return out;
}

Manifest generate_corpus(int n_utts, int len_min, int len_max, const SynthConfig& cfg,
                         std::uint64_t seed, const std::string& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "wav");

  Rng label_rng(mix_seed(seed, 1));
  std::vector<ToneSequence> labels = draw_tone_sequences(n_utts, len_min, len_max, label_rng);

  Manifest manifest;
  manifest.entries.reserve(static_cast<size_t>(n_utts));
  for (int i = 0; i < n_utts; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05d", i + 1);
    Rng utt_rng(mix_seed(seed, 1000 + static_cast<std::uint64_t>(i)));
    AudioSignal sig = synth_utterance(labels[i], cfg, utt_rng);

    ManifestEntry entry;
    entry.id = id;
    entry.audio_path = std::string("wav/") + id + ".wav";
    entry.tones = labels[i];
    write_wav((fs::path(out_dir) / entry.audio_path).string(), sig);
    manifest.entries.push_back(std::move(entry));
  }
  save_manifest(manifest, (fs::path(out_dir) / "manifest.tsv").string());
  return manifest;
}

}  // namespace tonerec
