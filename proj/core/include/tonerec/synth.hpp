#pragma once

#include <array>
#include <string>

#include "tonerec/dsp.hpp"
#include "tonerec/manifest.hpp"
#include "tonerec/rng.hpp"
#include "tonerec/types.hpp"

namespace tonerec {

// F0 multiplier contour, piecewise linear through the midpoint. The neutral
// tone gets a shortened syllable via duration_scale.
struct ToneContour {
  double start = 1.0;
  double mid = 1.0;
  double end = 1.0;
  double duration_scale = 1.0;
};

struct SynthConfig {
  int sample_rate = 16000;

  // per-utterance speaker pitch, jittered a few percent per syllable
  double base_f0_min = 155.0;
  double base_f0_max = 245.0;

  double syl_dur_min = 0.22;  // seconds, before duration_scale
  double syl_dur_max = 0.32;
  double gap_min = 0.05;  // inter-syllable silence
  double gap_max = 0.10;
  double lead_trail = 0.10;  // silence at both ends

  double noise_level = 0.002;

  // fixed two-formant vocal tract
  double formant1_hz = 700.0;
  double formant2_hz = 1250.0;
  double formant_bw_hz = 120.0;

  // pad with trailing silence until the conv stack keeps enough time steps
  // for the utterance's CTC alignment (plus margin)
  bool pad_for_model = true;

  // tone 1 level, tone 2 rising, tone 3 dipping, tone 4 falling,
  // tone 0 short mid-level
  std::array<ToneContour, kNumTones> contours = {{
      {0.90, 0.90, 0.90, 0.6},  // tone 0
      {1.00, 1.00, 1.00, 1.0},  // tone 1
      {0.80, 0.95, 1.10, 1.0},  // tone 2
      {0.90, 0.70, 0.90, 1.0},  // tone 3
      {1.20, 1.00, 0.80, 1.0},  // tone 4
  }};

  void validate() const;
};

// One utterance: per syllable draw duration and F0 jitter, build the F0
// contour from the tone template, run a glottal impulse train through the
// formant resonators, shape with an amplitude envelope that tracks the
// contour, and join the syllables with short silences.
AudioSignal synth_utterance(const ToneSequence& tones, const SynthConfig& cfg, Rng& rng);

std::vector<ToneSequence> draw_tone_sequences(int n, int len_min, int len_max, Rng& rng);

// Writes out_dir/wav/<id>.wav for every utterance plus out_dir/manifest.tsv.
// Tone sequences are drawn uniformly with lengths in [len_min, len_max].
Manifest generate_corpus(int n_utts, int len_min, int len_max, const SynthConfig& cfg,
                         std::uint64_t seed, const std::string& out_dir);

}  // namespace tonerec
