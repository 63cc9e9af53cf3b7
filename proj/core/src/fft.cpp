#include "tonerec/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace tonerec {

Fft::Fft(int n) : n_(n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft size must be a power of two");
  }
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;

  twiddle_.resize(n / 2);
  for (int k = 0; k < n / 2; ++k) {
    double ang = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = {std::cos(ang), std::sin(ang)};
  }

  bitrev_.resize(n);
  for (int i = 0; i < n; ++i) {
    int rev = 0;
    for (int b = 0; b < log2n; ++b) {
      rev = (rev << 1) | ((i >> b) & 1);
    }
    bitrev_[i] = rev;
  }
}

void Fft::transform(std::complex<double>* a, bool inverse) const {
  for (int i = 0; i < n_; ++i) {
    int j = bitrev_[i];
    if (j > i) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n_; len <<= 1) {
    int half = len >> 1;
    int step = n_ / len;
    for (int base = 0; base < n_; base += len) {
      for (int k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * step];
        if (inverse) w = std::conj(w);
        std::complex<double> u = a[base + k];
        std::complex<double> v = a[base + k + half] * w;
        a[base + k] = u + v;
        a[base + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    double inv_n = 1.0 / static_cast<double>(n_);
    for (int i = 0; i < n_; ++i) a[i] *= inv_n;
  }
}

void Fft::transform(std::vector<std::complex<double>>& data, bool inverse) const {
  if (static_cast<int>(data.size()) != n_) {
    throw std::invalid_argument("fft input length mismatch");
  }
  transform(data.data(), inverse);
}

}  // namespace tonerec
