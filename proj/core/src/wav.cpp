#include "tonerec/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tonerec {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioSignal load_wav(const std::string& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavErrorCode::kIo, "cannot open: " + path);

  unsigned char hdr[12];
  if (!in.read(reinterpret_cast<char*>(hdr), 12)) {
    throw WavError(WavErrorCode::kBadHeader, "not a RIFF file: " + path);
  }
  if (std::memcmp(hdr, "RIFF", 4) != 0) {
    throw WavError(WavErrorCode::kBadHeader, "missing RIFF magic: " + path);
  }
  if (std::memcmp(hdr + 8, "WAVE", 4) != 0) {
    throw WavError(WavErrorCode::kBadHeader, "missing WAVE magic: " + path);
  }

  bool have_fmt = false;
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::vector<char> data;
  bool have_data = false;

  unsigned char chunk_hdr[8];
  while (in.read(reinterpret_cast<char*>(chunk_hdr), 8)) {
    const std::uint32_t size = read_u32(chunk_hdr + 4);
    if (std::memcmp(chunk_hdr, "fmt ", 4) == 0) {
      if (size < 16) throw WavError(WavErrorCode::kBadHeader, "fmt chunk too small: " + path);
      unsigned char fmt[16];
      if (!in.read(reinterpret_cast<char*>(fmt), 16)) {
        throw WavError(WavErrorCode::kTruncated, "truncated fmt chunk: " + path);
      }
      format_tag = read_u16(fmt + 0);
      channels = read_u16(fmt + 2);
      sample_rate = read_u32(fmt + 4);
      bits = read_u16(fmt + 14);
      have_fmt = true;
      in.seekg(size - 16 + (size & 1), std::ios::cur);
    } else if (std::memcmp(chunk_hdr, "data", 4) == 0) {
      data.resize(size);
      if (!in.read(data.data(), size)) {
        throw WavError(WavErrorCode::kTruncated, "truncated data chunk: " + path);
      }
      have_data = true;
      if (size & 1) in.seekg(1, std::ios::cur);
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
      if (!in) break;
    }
  }

  if (!have_fmt) throw WavError(WavErrorCode::kBadHeader, "missing fmt chunk: " + path);
  if (!have_data) throw WavError(WavErrorCode::kBadHeader, "missing data chunk: " + path);
  if (format_tag != 1) {
    throw WavError(WavErrorCode::kUnsupportedFormat,
                   "unsupported format tag " + std::to_string(format_tag) + ": " + path);
  }
  if (channels != 1) {
    throw WavError(WavErrorCode::kUnsupportedChannels,
                   "unsupported channel count " + std::to_string(channels) + ": " + path);
  }
  if (bits != 16) {
    throw WavError(WavErrorCode::kUnsupportedBitDepth,
                   "unsupported bit depth " + std::to_string(bits) + ": " + path);
  }
  if (expected_rate != 0 && static_cast<int>(sample_rate) != expected_rate) {
    throw WavError(WavErrorCode::kRateMismatch,
                   "sample rate " + std::to_string(sample_rate) + " != expected " +
                       std::to_string(expected_rate) + ": " + path);
  }

  AudioSignal sig;
  sig.sample_rate = static_cast<int>(sample_rate);
  const size_t n = data.size() / 2;
  sig.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    std::int16_t s;
    std::memcpy(&s, data.data() + 2 * i, 2);
    sig.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return sig;
}

void write_wav(const std::string& path, const AudioSignal& signal) {
  const std::uint32_t n = static_cast<std::uint32_t>(signal.samples.size());
  const std::uint32_t data_size = n * 2;

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits
  out += "data";
  put_u32(out, data_size);
  for (float v : signal.samples) {
    double scaled = std::lround(static_cast<double>(v) * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw WavError(WavErrorCode::kIo, "cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw WavError(WavErrorCode::kIo, "write failed: " + path);
}

}  // namespace tonerec
