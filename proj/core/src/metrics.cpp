#include "tonerec/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace tonerec {

Alignment align(const ToneSequence& hyp, const ToneSequence& ref) {
  const int m = static_cast<int>(hyp.size());
  const int n = static_cast<int>(ref.size());
  std::vector<int> dist(static_cast<size_t>(m + 1) * (n + 1));
  auto d = [&dist, n](int i, int j) -> int& {
    return dist[static_cast<size_t>(i) * (n + 1) + j];
  };

  for (int i = 0; i <= m; ++i) d(i, 0) = i;
  for (int j = 0; j <= n; ++j) d(0, j) = j;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      const int sub = d(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      const int ins = d(i - 1, j) + 1;
      const int del = d(i, j - 1) + 1;
      d(i, j) = std::min({sub, ins, del});
    }
  }

  Alignment out;
  out.counts.ref_len = n;
  std::vector<AlignmentOp> rev_ops;
  int i = m;
  int j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] && d(i, j) == d(i - 1, j - 1)) {
      rev_ops.push_back({EditOpKind::kMatch, j - 1, i - 1});
      --i;
      --j;
    } else if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + 1) {
      rev_ops.push_back({EditOpKind::kSubstitution, j - 1, i - 1});
      ++out.counts.substitutions;
      --i;
      --j;
    } else if (j > 0 && d(i, j) == d(i, j - 1) + 1) {
      rev_ops.push_back({EditOpKind::kDeletion, j - 1, -1});
      ++out.counts.deletions;
      --j;
    } else {
      rev_ops.push_back({EditOpKind::kInsertion, -1, i - 1});
      ++out.counts.insertions;
      --i;
    }
  }
  out.ops.assign(rev_ops.rbegin(), rev_ops.rend());
  return out;
}

double corpus_ter(const std::vector<std::pair<ToneSequence, ToneSequence>>& pairs) {
  long errors = 0;
  long ref_total = 0;
  for (const auto& [hyp, ref] : pairs) {
    Alignment a = align(hyp, ref);
    errors += a.counts.distance();
    ref_total += a.counts.ref_len;
  }
  if (ref_total == 0) throw std::invalid_argument("corpus_ter: all references empty");
  return static_cast<double>(errors) / static_cast<double>(ref_total);
}

std::array<std::optional<double>, kNumTones> per_tone_accuracy(
    const std::vector<ScoredPair>& pairs) {
  std::array<long, kNumTones> ref_counts = {};
  std::array<long, kNumTones> match_counts = {};
  for (const ScoredPair& p : pairs) {
    for (int tone : p.ref) ++ref_counts[tone];
    for (const AlignmentOp& op : p.alignment.ops) {
      if (op.kind == EditOpKind::kMatch) ++match_counts[p.ref[op.ref_index]];
    }
  }
  std::array<std::optional<double>, kNumTones> acc;
  for (int t = 0; t < kNumTones; ++t) {
    if (ref_counts[t] > 0) {
      acc[t] = static_cast<double>(match_counts[t]) / static_cast<double>(ref_counts[t]);
    }
  }
  return acc;
}

EvalReport evaluate_pairs(const std::vector<std::pair<ToneSequence, ToneSequence>>& pairs) {
  EvalReport rep;
  for (const auto& [hyp, ref] : pairs) {
    Alignment a = align(hyp, ref);
    rep.totals.insertions += a.counts.insertions;
    rep.totals.deletions += a.counts.deletions;
    rep.totals.substitutions += a.counts.substitutions;
    rep.totals.ref_len += a.counts.ref_len;
    for (int tone : ref) ++rep.tone_ref_counts[tone];
    for (const AlignmentOp& op : a.ops) {
      if (op.kind == EditOpKind::kMatch) ++rep.tone_match_counts[ref[op.ref_index]];
    }
  }
  if (rep.totals.ref_len == 0) throw std::invalid_argument("corpus_ter: all references empty");
  rep.ter = static_cast<double>(rep.totals.distance()) /
            static_cast<double>(rep.totals.ref_len);
  for (int t = 0; t < kNumTones; ++t) {
    if (rep.tone_ref_counts[t] > 0) {
      rep.tone_accuracy[t] = static_cast<double>(rep.tone_match_counts[t]) /
                             static_cast<double>(rep.tone_ref_counts[t]);
    }
  }
  return rep;
}

std::string render_report(const EvalReport& rep) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "TER: %.2f%%  (%ld errors / %ld reference tones)\n",
                100.0 * rep.ter, rep.totals.distance(), rep.totals.ref_len);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Errors: insertions %ld, deletions %ld, substitutions %ld\n",
                rep.totals.insertions, rep.totals.deletions, rep.totals.substitutions);
  out += buf;
  out += "Per-tone accuracy:\n";
  for (int t = 0; t < kNumTones; ++t) {
    if (rep.tone_accuracy[t].has_value()) {
      std::snprintf(buf, sizeof(buf), "  tone %d: %6.2f%%  (%ld/%ld)\n", t,
                    100.0 * *rep.tone_accuracy[t], rep.tone_match_counts[t],
                    rep.tone_ref_counts[t]);
    } else {
      std::snprintf(buf, sizeof(buf), "  tone %d:    n/a  (no reference tokens)\n", t);
    }
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "ter=%.6f\n", rep.ter);
  out += buf;
  std::snprintf(buf, sizeof(buf), "insertions=%ld\ndeletions=%ld\nsubstitutions=%ld\nref_len=%ld\n",
                rep.totals.insertions, rep.totals.deletions, rep.totals.substitutions,
                rep.totals.ref_len);
  out += buf;
  for (int t = 0; t < kNumTones; ++t) {
    if (rep.tone_accuracy[t].has_value()) {
      std::snprintf(buf, sizeof(buf), "tone%d_acc=%.6f\n", t, *rep.tone_accuracy[t]);
    } else {
      std::snprintf(buf, sizeof(buf), "tone%d_acc=undefined\n", t);
    }
    out += buf;
  }
  return out;
}

}  // namespace tonerec
