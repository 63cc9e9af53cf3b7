#pragma once

#include <string>
#include <vector>

namespace tonerec {

// Mono PCM, samples normalized to [-1, 1).
struct AudioSignal {
  std::vector<float> samples;
  int sample_rate = 16000;
};

enum class FrontendMode {
  kCepstrogram,
  kSpectrogram,          // stop after log|DFT|
  kHighTimeCepstrogram,  // cepstrogram with the low-quefrency bins zeroed
};

struct FrontendConfig {
  double frame_len_ms = 25.0;
  double hop_ms = 10.0;
  int fft_len = 512;
  FrontendMode mode = FrontendMode::kCepstrogram;
  int lifter_cut = 25;   // high-time mode only: bins [0, lifter_cut) are zeroed
  int quefrency_bins = 256;
  double log_floor = 1e-10;
  bool normalize = true;  // per-utterance, per-bin mean/variance

  int frame_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
  void validate(int sample_rate) const;
};

// Time x quefrency (or time x frequency in spectrogram mode) feature map.
struct Cepstrogram {
  int num_frames = 0;
  int num_bins = 0;
  std::vector<float> data;  // row-major [num_frames x num_bins]
  double frame_hop_s = 0.0;

  float* row(int i) { return data.data() + static_cast<size_t>(i) * num_bins; }
  const float* row(int i) const { return data.data() + static_cast<size_t>(i) * num_bins; }
};

// Frames start at i * hop; trailing samples that do not fill a frame are dropped.
// Throws "signal too short" if the signal does not cover one frame.
std::vector<std::vector<double>> frame_signal(const AudioSignal& signal,
                                              const FrontendConfig& cfg);

int frame_count(int num_samples, int frame_samples, int hop_samples);

// Symmetric Hamming window, w[n] = 0.54 - 0.46*cos(2*pi*n/(N-1)).
std::vector<double> hamming_window(int n);
std::vector<double> apply_window(const std::vector<double>& frame);

// log(max(|DFT(x)|, log_floor)) for bins 0..fft_len/2; input is zero-padded
// to fft_len.
std::vector<double> log_spectrum(const std::vector<double>& windowed,
                                 const FrontendConfig& cfg);

// IDFT of the full even-symmetric log spectrum, truncated to quefrency_bins.
std::vector<double> cepstrum(const std::vector<double>& windowed,
                             const FrontendConfig& cfg);

// Zero bins [0, cut) of one cepstrum.
void apply_high_time_lifter(std::vector<double>& ceps, int cut);

Cepstrogram featurize(const AudioSignal& signal, const FrontendConfig& cfg);

// Binary PGM (P5): width = num_frames, height = num_bins with bin 0 at the
// top, values min-max scaled to 0..255.
std::string render_pgm(const Cepstrogram& gram);
void write_pgm(const Cepstrogram& gram, const std::string& path);

}  // namespace tonerec
