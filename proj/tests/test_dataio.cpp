#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "tonerec/dsp.hpp"
#include "tonerec/manifest.hpp"
#include "tonerec/nn.hpp"
#include "tonerec/rng.hpp"
#include "tonerec/synth.hpp"
#include "tonerec/wav.hpp"

using namespace tonerec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

void write_pcm16_wav(const fs::path& path, const std::vector<std::int16_t>& samples,
                     int rate = 16000, int channels = 1, int bits = 16, int format = 1) {
  std::ofstream out(path, std::ios::binary);
  auto u32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&out](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  u32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(static_cast<std::uint16_t>(format));
  u16(static_cast<std::uint16_t>(channels));
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * bits / 8));
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(static_cast<std::uint16_t>(bits));
  out.write("data", 4);
  u32(data_size);
  for (std::int16_t s : samples) out.write(reinterpret_cast<const char*>(&s), 2);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int peak_bin(const float* row, int lo, int hi) {
  int best = lo;
  for (int b = lo; b < hi; ++b) {
    if (row[b] > row[best]) best = b;
  }
  return best;
}

}  // namespace

TEST_CASE("load_wav scales 16-bit samples by 1/32768") {
  const fs::path path = temp_file("tonerec_scale.wav");
  write_pcm16_wav(path, {0, 16384, -16384, 32767});
  AudioSignal sig = load_wav(path.string());
  REQUIRE(sig.samples.size() == 4);
  CHECK(sig.samples[0] == 0.0f);
  CHECK(sig.samples[1] == 0.5f);
  CHECK(sig.samples[2] == -0.5f);
  CHECK(sig.samples[3] == doctest::Approx(32767.0 / 32768.0));
  CHECK(sig.sample_rate == 16000);
  fs::remove(path);
}

TEST_CASE("load_wav rejects unsupported files with distinct codes") {
  const fs::path path = temp_file("tonerec_bad.wav");

  write_pcm16_wav(path, {0, 0}, 16000, 2);
  CHECK_THROWS_AS(load_wav(path.string()), WavError);
  try {
    load_wav(path.string());
  } catch (const WavError& e) {
    CHECK(e.code() == WavErrorCode::kUnsupportedChannels);
  }

  write_pcm16_wav(path, {0, 0}, 16000, 1, 16, 3);  // float format tag
  try {
    load_wav(path.string());
  } catch (const WavError& e) {
    CHECK(e.code() == WavErrorCode::kUnsupportedFormat);
  }

  write_pcm16_wav(path, {0, 0}, 8000);
  try {
    load_wav(path.string(), 16000);
  } catch (const WavError& e) {
    CHECK(e.code() == WavErrorCode::kRateMismatch);
  }
  CHECK_NOTHROW(load_wav(path.string()));  // rate check only when requested

  std::ofstream(path, std::ios::binary) << "JUNKJUNKJUNKJUNK";
  try {
    load_wav(path.string());
  } catch (const WavError& e) {
    CHECK(e.code() == WavErrorCode::kBadHeader);
  }

  CHECK_THROWS_AS(load_wav((temp_file("missing_dir") / "nope.wav").string()), WavError);
  fs::remove(path);
}

TEST_CASE("wav write/load round trip is exact") {
  Rng rng(1);
  const fs::path path = temp_file("tonerec_roundtrip.wav");

  std::vector<std::int16_t> raw(2048);
  for (std::int16_t& s : raw) {
    s = static_cast<std::int16_t>(rng.uniform_int(-32768, 32767));
  }
  write_pcm16_wav(path, raw);
  AudioSignal first = load_wav(path.string());

  const fs::path path2 = temp_file("tonerec_roundtrip2.wav");
  write_wav(path2.string(), first);
  AudioSignal second = load_wav(path2.string());
  CHECK(first.samples == second.samples);
  CHECK(slurp(path) == slurp(path2));

  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("synth determinism") {
  SynthConfig cfg;
  ToneSequence tones = {1, 4, 0};
  Rng a(42);
  Rng b(42);
  Rng c(43);
  AudioSignal sa = synth_utterance(tones, cfg, a);
  AudioSignal sb = synth_utterance(tones, cfg, b);
  AudioSignal sc = synth_utterance(tones, cfg, c);
  CHECK(sa.samples == sb.samples);
  CHECK(sa.samples != sc.samples);
}

TEST_CASE("synth tone 1 at 200 Hz puts the cepstral peak near bin 80") {
  SynthConfig cfg;
  cfg.base_f0_min = 200.0;
  cfg.base_f0_max = 200.0;
  cfg.lead_trail = 0.0;
  cfg.pad_for_model = false;
  cfg.noise_level = 0.0;

  Rng rng(7);
  AudioSignal sig = synth_utterance({1}, cfg, rng);

  FrontendConfig fcfg;
  fcfg.normalize = false;
  Cepstrogram gram = featurize(sig, fcfg);
  // mid-syllable frames only; onset and release are attenuated
  const int lo = gram.num_frames / 4;
  const int hi = gram.num_frames * 3 / 4;
  for (int f = lo; f < hi; ++f) {
    const int bin = peak_bin(gram.row(f), 32, 256);
    CHECK(std::abs(bin - 80) <= 2);
  }
}

TEST_CASE("synth tone 4 pitch falls, so the quefrency peak rises") {
  SynthConfig cfg;
  cfg.base_f0_min = 200.0;
  cfg.base_f0_max = 200.0;
  cfg.lead_trail = 0.0;
  cfg.pad_for_model = false;
  cfg.noise_level = 0.0;
  cfg.syl_dur_min = 0.30;
  cfg.syl_dur_max = 0.30;

  Rng rng(8);
  AudioSignal sig = synth_utterance({4}, cfg, rng);
  FrontendConfig fcfg;
  fcfg.normalize = false;
  Cepstrogram gram = featurize(sig, fcfg);

  const int lo = gram.num_frames / 4;
  const int hi = gram.num_frames * 3 / 4;
  int prev = peak_bin(gram.row(lo), 32, 256);
  for (int f = lo + 1; f < hi; ++f) {
    const int bin = peak_bin(gram.row(f), 32, 256);
    CHECK(bin >= prev - 1);  // non-decreasing up to one bin of jitter
    prev = std::max(prev, bin);
  }
}

TEST_CASE("tones 2 and 4 produce opposite peak-track slopes") {
  SynthConfig cfg;
  cfg.lead_trail = 0.0;
  cfg.pad_for_model = false;
  cfg.noise_level = 0.0;
  cfg.syl_dur_min = 0.30;
  cfg.syl_dur_max = 0.30;
  cfg.base_f0_min = 180.0;
  cfg.base_f0_max = 180.0;

  FrontendConfig fcfg;
  fcfg.normalize = false;

  auto slope = [&](int tone) {
    Rng rng(9);
    AudioSignal sig = synth_utterance({tone}, cfg, rng);
    Cepstrogram gram = featurize(sig, fcfg);
    const int lo = gram.num_frames / 4;
    const int hi = gram.num_frames * 3 / 4;
    return peak_bin(gram.row(hi - 1), 32, 256) - peak_bin(gram.row(lo), 32, 256);
  };

  CHECK(slope(2) < 0);  // rising pitch, falling quefrency
  CHECK(slope(4) > 0);
}

TEST_CASE("synthesized audio never clips") {
  SynthConfig cfg;
  Rng rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    ToneSequence tones;
    const int len = rng.uniform_int(1, 6);
    for (int i = 0; i < len; ++i) tones.push_back(rng.uniform_int(0, 4));
    AudioSignal sig = synth_utterance(tones, cfg, rng);
    for (float v : sig.samples) CHECK(std::abs(v) <= 0.99f);
  }
}

TEST_CASE("synth padding leaves room for the CTC alignment") {
  SynthConfig cfg;
  Rng rng(11);
  // worst case: six identical tones need T >= 11
  AudioSignal sig = synth_utterance({3, 3, 3, 3, 3, 3}, cfg, rng);
  const int frames = frame_count(static_cast<int>(sig.samples.size()), 400, 160);
  CHECK(conv_stack_steps(frames) >= 13);
}

TEST_CASE("manifest parsing") {
  const fs::path path = temp_file("tonerec_manifest.tsv");
  std::ofstream(path) << "utt1\ta/b.wav\t1 2 3\nutt2\tc.wav\t0\n";
  Manifest m = load_manifest(path.string());
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].id == "utt1");
  CHECK(m.entries[0].audio_path == "a/b.wav");
  CHECK(m.entries[0].tones == ToneSequence{1, 2, 3});
  CHECK(m.entries[1].tones == ToneSequence{0});

  std::ofstream(path) << "";
  CHECK(load_manifest(path.string()).entries.empty());

  std::ofstream(path) << "utt1\ta.wav\t1\nutt2\tb.wav\t7\n";
  CHECK_THROWS_WITH(load_manifest(path.string()),
                    "manifest line 2: bad tone digit '7' (expected 0..4)");

  std::ofstream(path) << "utt1\ta.wav\t1\nutt1\tb.wav\t2\n";
  CHECK_THROWS_WITH(load_manifest(path.string()), "manifest line 2: duplicate id 'utt1'");

  std::ofstream(path) << "only_two_fields\tx.wav\n";
  CHECK_THROWS(load_manifest(path.string()));
  fs::remove(path);
}

TEST_CASE("manifest round trip") {
  Manifest m;
  m.entries = {{"a", "wav/a.wav", {0, 1}}, {"b", "wav/b.wav", {4}}};
  const fs::path path = temp_file("tonerec_manifest_rt.tsv");
  save_manifest(m, path.string());
  Manifest loaded = load_manifest(path.string());
  REQUIRE(loaded.entries.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(loaded.entries[i].id == m.entries[i].id);
    CHECK(loaded.entries[i].audio_path == m.entries[i].audio_path);
    CHECK(loaded.entries[i].tones == m.entries[i].tones);
  }
  fs::remove(path);
}

TEST_CASE("generate_corpus writes a loadable corpus deterministically") {
  const fs::path dir_a = fs::temp_directory_path() / "tonerec_corpus_a";
  const fs::path dir_b = fs::temp_directory_path() / "tonerec_corpus_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  SynthConfig cfg;
  Manifest ma = generate_corpus(10, 2, 4, cfg, 99, dir_a.string());
  Manifest mb = generate_corpus(10, 2, 4, cfg, 99, dir_b.string());

  REQUIRE(ma.entries.size() == 10);
  for (const ManifestEntry& e : ma.entries) {
    CHECK(e.tones.size() >= 2);
    CHECK(e.tones.size() <= 4);
    CHECK(fs::exists(dir_a / e.audio_path));
  }
  CHECK(slurp(dir_a / "manifest.tsv") == slurp(dir_b / "manifest.tsv"));
  CHECK(slurp(dir_a / ma.entries[0].audio_path) == slurp(dir_b / mb.entries[0].audio_path));

  Manifest loaded = load_manifest((dir_a / "manifest.tsv").string());
  CHECK(loaded.entries.size() == 10);
  AudioSignal sig = load_wav((dir_a / loaded.entries[0].audio_path).string(), 16000);
  CHECK(sig.samples.size() > 16000u);  // padded past the receptive field

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("drawn tone labels are uniform within 3 sigma") {
  Rng rng(12);
  std::vector<ToneSequence> seqs = draw_tone_sequences(5000, 2, 6, rng);
  CHECK(seqs.size() == 5000);

  long counts[kNumTones] = {};
  long total = 0;
  for (const ToneSequence& s : seqs) {
    CHECK(s.size() >= 2);
    CHECK(s.size() <= 6);
    for (int t : s) {
      ++counts[t];
      ++total;
    }
  }
  const double p = 1.0 / kNumTones;
  const double sigma = std::sqrt(static_cast<double>(total) * p * (1.0 - p));
  for (long c : counts) {
    CHECK(std::abs(static_cast<double>(c) - total * p) <= 3.0 * sigma);
  }
}
