#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tonerec/types.hpp"

namespace tonerec {

enum class EditOpKind { kMatch, kSubstitution, kInsertion, kDeletion };

struct AlignmentOp {
  EditOpKind kind;
  int ref_index = -1;  // set for match/substitution/deletion
  int hyp_index = -1;  // set for match/substitution/insertion
};

struct EditBreakdown {
  long insertions = 0;
  long deletions = 0;
  long substitutions = 0;
  long ref_len = 0;
  long distance() const { return insertions + deletions + substitutions; }
};

struct Alignment {
  EditBreakdown counts;
  std::vector<AlignmentOp> ops;
};

// Unit-cost edit distance with backtrace. Cost ties break preferring
// match > substitution > deletion > insertion.
Alignment align(const ToneSequence& hyp, const ToneSequence& ref);

// Micro-averaged TER: (sum I + D + S) / (sum ref lengths).
double corpus_ter(const std::vector<std::pair<ToneSequence, ToneSequence>>& hyp_ref_pairs);

struct ScoredPair {
  ToneSequence hyp;
  ToneSequence ref;
  Alignment alignment;
};

// Accuracy of tone t = matches with reference token t / reference tokens t;
// tones absent from the references are reported as nullopt.
std::array<std::optional<double>, kNumTones> per_tone_accuracy(
    const std::vector<ScoredPair>& pairs);

struct EvalReport {
  EditBreakdown totals;
  double ter = 0.0;
  std::array<std::optional<double>, kNumTones> tone_accuracy;
  std::array<long, kNumTones> tone_ref_counts = {};
  std::array<long, kNumTones> tone_match_counts = {};
};

EvalReport evaluate_pairs(const std::vector<std::pair<ToneSequence, ToneSequence>>& hyp_ref_pairs);

// Human-readable tables followed by a line-oriented key=value dump.
std::string render_report(const EvalReport& report);

}  // namespace tonerec
