#pragma once

#include <cstdint>
#include <random>

namespace tonerec {

// splitmix64 step; used to derive independent stream seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// mt19937_64 with hand-rolled distributions. The engine is pinned by the
// standard; std:: distributions are not bit-stable across library
// implementations, and checkpoints must reproduce bitwise.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1), 53-bit resolution
  double uniform();
  // [lo, hi)
  double uniform(double lo, double hi);
  // standard normal (Box-Muller, no cached spare)
  double normal();
  // integer in [lo, hi], inclusive
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace tonerec
