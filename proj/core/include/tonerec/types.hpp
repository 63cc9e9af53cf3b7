#pragma once

#include <vector>

namespace tonerec {

// Tones 0..4; tone 0 is the Mandarin neutral tone.
using ToneSequence = std::vector<int>;

inline constexpr int kNumTones = 5;
// Network output classes: index 0 is the CTC blank, tone t maps to class t + 1.
inline constexpr int kNumClasses = kNumTones + 1;
inline constexpr int kBlank = 0;

inline bool valid_tone(int t) { return t >= 0 && t < kNumTones; }

inline bool valid_tone_sequence(const ToneSequence& tones) {
  for (int t : tones) {
    if (!valid_tone(t)) return false;
  }
  return true;
}

}  // namespace tonerec
