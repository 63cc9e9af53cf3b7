#pragma once

#include <stdexcept>
#include <string>

#include "tonerec/dsp.hpp"

namespace tonerec {

enum class WavErrorCode {
  kIo,
  kBadHeader,
  kUnsupportedFormat,     // format tag != PCM
  kUnsupportedChannels,   // not mono
  kUnsupportedBitDepth,   // not 16-bit
  kRateMismatch,
  kTruncated,
};

class WavError : public std::runtime_error {
 public:
  WavError(WavErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  WavErrorCode code() const { return code_; }

 private:
  WavErrorCode code_;
};

// Reads a RIFF/WAVE file with PCM format 1, 16 bits, one channel. Samples are
// scaled by 1/32768. No resampling: if expected_rate is nonzero and the file
// rate differs, kRateMismatch is thrown.
AudioSignal load_wav(const std::string& path, int expected_rate = 0);

// 16-bit mono PCM.
void write_wav(const std::string& path, const AudioSignal& signal);

}  // namespace tonerec
