#include "tonerec/dsp.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tonerec/fft.hpp"

namespace tonerec {

int FrontendConfig::frame_samples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_len_ms * sample_rate / 1000.0));
}

int FrontendConfig::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FrontendConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  if (!is_power_of_two(fft_len)) throw std::invalid_argument("fft_len must be a power of two");
  if (fft_len < frame_samples(sample_rate)) {
    throw std::invalid_argument("fft_len must be >= frame length in samples");
  }
  if (frame_samples(sample_rate) < 1 || hop_samples(sample_rate) < 1) {
    throw std::invalid_argument("frame and hop must be at least one sample");
  }
  if (quefrency_bins < 1 || quefrency_bins > fft_len / 2) {
    throw std::invalid_argument("quefrency_bins must be in [1, fft_len/2]");
  }
  if (lifter_cut <= 0 || lifter_cut >= quefrency_bins) {
    throw std::invalid_argument("lifter_cut must be in (0, quefrency_bins)");
  }
  if (!(log_floor > 0.0)) throw std::invalid_argument("log_floor must be positive");
}

int frame_count(int num_samples, int frame_samples, int hop_samples) {
  if (num_samples < frame_samples) return 0;
  return (num_samples - frame_samples) / hop_samples + 1;
}

std::vector<std::vector<double>> frame_signal(const AudioSignal& signal,
                                              const FrontendConfig& cfg) {
  cfg.validate(signal.sample_rate);
  const int flen = cfg.frame_samples(signal.sample_rate);
  const int hop = cfg.hop_samples(signal.sample_rate);
  const int n = frame_count(static_cast<int>(signal.samples.size()), flen, hop);
  if (n < 1) throw std::invalid_argument("signal too short");

  std::vector<std::vector<double>> frames(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    frames[i].resize(static_cast<size_t>(flen));
    const float* src = signal.samples.data() + static_cast<size_t>(i) * hop;
    for (int j = 0; j < flen; ++j) frames[i][j] = static_cast<double>(src[j]);
  }
  return frames;
}

std::vector<double> hamming_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n - 1));
  }
  return w;
}

std::vector<double> apply_window(const std::vector<double>& frame) {
  if (frame.empty()) throw std::invalid_argument("frame must be nonempty");
  std::vector<double> w = hamming_window(static_cast<int>(frame.size()));
  for (size_t i = 0; i < frame.size(); ++i) w[i] *= frame[i];
  return w;
}

namespace {

// |DFT| of the zero-padded frame, bins 0..fft_len/2.
std::vector<double> magnitude_spectrum(const std::vector<double>& windowed,
                                       const FrontendConfig& cfg, const Fft& fft) {
  if (static_cast<int>(windowed.size()) > cfg.fft_len) {
    throw std::invalid_argument("frame longer than fft_len");
  }
  std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.fft_len));
  for (size_t i = 0; i < windowed.size(); ++i) buf[i] = windowed[i];
  fft.transform(buf, false);

  std::vector<double> mag(static_cast<size_t>(cfg.fft_len / 2 + 1));
  for (int k = 0; k <= cfg.fft_len / 2; ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<double> log_spectrum_impl(const std::vector<double>& windowed,
                                      const FrontendConfig& cfg, const Fft& fft) {
  std::vector<double> s = magnitude_spectrum(windowed, cfg, fft);
  for (double& v : s) v = std::log(std::max(v, cfg.log_floor));
  return s;
}

// IDFT of the even-symmetric extension of the half log spectrum. The result
// of a real symmetric input is real; the imaginary residue is rounding noise
// and is discarded.
std::vector<double> cepstrum_impl(const std::vector<double>& half_log_spec,
                                  const FrontendConfig& cfg, const Fft& fft) {
  const int n = cfg.fft_len;
  std::vector<std::complex<double>> buf(static_cast<size_t>(n));
  for (int k = 0; k <= n / 2; ++k) buf[k] = half_log_spec[k];
  for (int k = 1; k < n / 2; ++k) buf[n - k] = half_log_spec[k];
  fft.transform(buf, true);

  std::vector<double> ceps(static_cast<size_t>(cfg.quefrency_bins));
  for (int i = 0; i < cfg.quefrency_bins; ++i) ceps[i] = buf[i].real();
  return ceps;
}

}  // namespace

std::vector<double> log_spectrum(const std::vector<double>& windowed,
                                 const FrontendConfig& cfg) {
  Fft fft(cfg.fft_len);
  return log_spectrum_impl(windowed, cfg, fft);
}

std::vector<double> cepstrum(const std::vector<double>& windowed,
                             const FrontendConfig& cfg) {
  Fft fft(cfg.fft_len);
  return cepstrum_impl(log_spectrum_impl(windowed, cfg, fft), cfg, fft);
}

void apply_high_time_lifter(std::vector<double>& ceps, int cut) {
  if (cut < 0 || cut > static_cast<int>(ceps.size())) {
    throw std::invalid_argument("lifter cut out of range");
  }
  for (int i = 0; i < cut; ++i) ceps[i] = 0.0;
}

Cepstrogram featurize(const AudioSignal& signal, const FrontendConfig& cfg) {
  std::vector<std::vector<double>> frames = frame_signal(signal, cfg);
  const int n = static_cast<int>(frames.size());
  const bool spectro = cfg.mode == FrontendMode::kSpectrogram;
  const int bins = spectro ? cfg.fft_len / 2 + 1 : cfg.quefrency_bins;

  Fft fft(cfg.fft_len);
  std::vector<double> window = hamming_window(static_cast<int>(frames[0].size()));
  std::vector<double> work(static_cast<size_t>(n) * bins);

  for (int i = 0; i < n; ++i) {
    std::vector<double>& frame = frames[i];
    for (size_t j = 0; j < frame.size(); ++j) frame[j] *= window[j];
    std::vector<double> feat = log_spectrum_impl(frame, cfg, fft);
    if (!spectro) {
      feat = cepstrum_impl(feat, cfg, fft);
      if (cfg.mode == FrontendMode::kHighTimeCepstrogram) {
        apply_high_time_lifter(feat, cfg.lifter_cut);
      }
    }
    std::copy(feat.begin(), feat.end(), work.begin() + static_cast<size_t>(i) * bins);
  }

  if (cfg.normalize) {
    for (int b = 0; b < bins; ++b) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i) mean += work[static_cast<size_t>(i) * bins + b];
      mean /= n;
      double var = 0.0;
      for (int i = 0; i < n; ++i) {
        double d = work[static_cast<size_t>(i) * bins + b] - mean;
        var += d * d;
      }
      var /= n;
      double std_dev = std::max(std::sqrt(var), 1e-5);
      for (int i = 0; i < n; ++i) {
        double& v = work[static_cast<size_t>(i) * bins + b];
        v = (v - mean) / std_dev;
      }
    }
  }

  Cepstrogram gram;
  gram.num_frames = n;
  gram.num_bins = bins;
  gram.frame_hop_s = cfg.hop_samples(signal.sample_rate) /
                     static_cast<double>(signal.sample_rate);
  gram.data.resize(work.size());
  for (size_t i = 0; i < work.size(); ++i) gram.data[i] = static_cast<float>(work[i]);
  return gram;
}

std::string render_pgm(const Cepstrogram& gram) {
  if (gram.num_frames < 1 || gram.num_bins < 1) {
    throw std::invalid_argument("empty feature map");
  }
  float lo = gram.data[0];
  float hi = gram.data[0];
  for (float v : gram.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

  char header[64];
  int header_len = std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n",
                                 gram.num_frames, gram.num_bins);
  std::string out(header, static_cast<size_t>(header_len));
  out.reserve(out.size() + gram.data.size());
  for (int b = 0; b < gram.num_bins; ++b) {
    for (int f = 0; f < gram.num_frames; ++f) {
      double v = (gram.row(f)[b] - lo) * scale;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
  }
  return out;
}

void write_pgm(const Cepstrogram& gram, const std::string& path) {
  std::string bytes = render_pgm(gram);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tonerec
