#pragma once

#include <complex>
#include <vector>

namespace tonerec {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 FFT for power-of-two sizes. The inverse transform
// includes the 1/n factor.
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }

  void transform(std::complex<double>* data, bool inverse) const;
  void transform(std::vector<std::complex<double>>& data, bool inverse) const;

 private:
  int n_;
  std::vector<std::complex<double>> twiddle_;  // e^{-2*pi*i*k/n}, k < n/2
  std::vector<int> bitrev_;
};

}  // namespace tonerec
