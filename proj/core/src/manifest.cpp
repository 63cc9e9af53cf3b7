#include "tonerec/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tonerec {

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);

  Manifest manifest;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    const size_t tab1 = line.find('\t');
    if (tab1 == std::string::npos) fail(line_no, "expected 3 tab-separated fields");
    const size_t tab2 = line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) fail(line_no, "expected 3 tab-separated fields");
    if (line.find('\t', tab2 + 1) != std::string::npos) {
      fail(line_no, "expected 3 tab-separated fields");
    }

    ManifestEntry entry;
    entry.id = line.substr(0, tab1);
    entry.audio_path = line.substr(tab1 + 1, tab2 - tab1 - 1);
    if (entry.id.empty()) fail(line_no, "empty utterance id");
    if (entry.audio_path.empty()) fail(line_no, "empty audio path");
    if (!seen_ids.insert(entry.id).second) fail(line_no, "duplicate id '" + entry.id + "'");

    std::istringstream tones(line.substr(tab2 + 1));
    std::string tok;
    while (tones >> tok) {
      if (tok.size() != 1 || tok[0] < '0' || tok[0] > '4') {
        fail(line_no, "bad tone digit '" + tok + "' (expected 0..4)");
      }
      entry.tones.push_back(tok[0] - '0');
    }
    if (entry.tones.empty()) fail(line_no, "empty tone sequence");
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const ManifestEntry& e : manifest.entries) {
    out << e.id << '\t' << e.audio_path << '\t';
    for (size_t i = 0; i < e.tones.size(); ++i) {
      if (i > 0) out << ' ';
      out << e.tones[i];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tonerec
