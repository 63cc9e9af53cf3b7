#pragma once

#include <string>
#include <vector>

#include "tonerec/types.hpp"

namespace tonerec {

struct ManifestEntry {
  std::string id;
  std::string audio_path;  // relative to the manifest's directory
  ToneSequence tones;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// One entry per line: utterance_id TAB relative-wav-path TAB space-separated
// tone digits. Errors carry the offending line number. An empty file is a
// valid empty manifest.
Manifest load_manifest(const std::string& path);

void save_manifest(const Manifest& manifest, const std::string& path);

}  // namespace tonerec
