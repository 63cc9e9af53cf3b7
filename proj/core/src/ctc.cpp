#include "tonerec/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tonerec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log softmax rows of the logits, computed in double
template <class S>
std::vector<double> log_softmax_rows(const TensorT<S>& logits) {
  const int t_len = logits.dim(0);
  const int k_len = logits.dim(1);
  std::vector<double> lsm(static_cast<size_t>(t_len) * k_len);
  for (int t = 0; t < t_len; ++t) {
    double hi = static_cast<double>(logits(t, 0));
    for (int k = 1; k < k_len; ++k) hi = std::max(hi, static_cast<double>(logits(t, k)));
    double sum = 0.0;
    for (int k = 0; k < k_len; ++k) sum += std::exp(static_cast<double>(logits(t, k)) - hi);
    const double lse = hi + std::log(sum);
    for (int k = 0; k < k_len; ++k) {
      lsm[static_cast<size_t>(t) * k_len + k] = static_cast<double>(logits(t, k)) - lse;
    }
  }
  return lsm;
}

int adjacent_repeats(const ToneSequence& labels) {
  int reps = 0;
  for (size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++reps;
  }
  return reps;
}

void check_labels(const ToneSequence& labels) {
  if (!valid_tone_sequence(labels)) throw std::invalid_argument("invalid tone label");
}

}  // namespace

template <class S>
CtcLoss<S> ctc_loss(const TensorT<S>& logits, const ToneSequence& labels) {
  if (logits.ndim() != 2 || logits.dim(1) != kNumClasses) {
    throw std::invalid_argument("ctc: logits must be [T][6]");
  }
  check_labels(labels);
  const int t_len = logits.dim(0);
  const int u_len = static_cast<int>(labels.size());
  if (t_len < u_len + adjacent_repeats(labels)) {
    throw std::invalid_argument("label longer than input");
  }

  // expanded sequence: blank, y_1, blank, y_2, ..., y_U, blank
  const int s_len = 2 * u_len + 1;
  std::vector<int> exp_cls(static_cast<size_t>(s_len), kBlank);
  for (int u = 0; u < u_len; ++u) exp_cls[2 * u + 1] = labels[u] + 1;

  const std::vector<double> lsm = log_softmax_rows(logits);
  auto y = [&lsm](int t, int k) { return lsm[static_cast<size_t>(t) * kNumClasses + k]; };

  // alpha[t][s] includes the emission at t; beta[t][s] covers t+1.. only, so
  // alpha[t][s] + beta[t][s] sums to log p(Y|X) over s at every t.
  std::vector<double> alpha(static_cast<size_t>(t_len) * s_len, kNegInf);
  std::vector<double> beta(static_cast<size_t>(t_len) * s_len, kNegInf);
  auto a = [&alpha, s_len](int t, int s) -> double& {
    return alpha[static_cast<size_t>(t) * s_len + s];
  };
  auto b = [&beta, s_len](int t, int s) -> double& {
    return beta[static_cast<size_t>(t) * s_len + s];
  };

  a(0, 0) = y(0, exp_cls[0]);
  if (s_len > 1) a(0, 1) = y(0, exp_cls[1]);
  for (int t = 1; t < t_len; ++t) {
    for (int s = 0; s < s_len; ++s) {
      double acc = a(t - 1, s);
      if (s >= 1) acc = log_add(acc, a(t - 1, s - 1));
      if (s >= 2 && exp_cls[s] != kBlank && exp_cls[s] != exp_cls[s - 2]) {
        acc = log_add(acc, a(t - 1, s - 2));
      }
      if (acc != kNegInf) a(t, s) = acc + y(t, exp_cls[s]);
    }
  }

  b(t_len - 1, s_len - 1) = 0.0;
  if (s_len > 1) b(t_len - 1, s_len - 2) = 0.0;
  for (int t = t_len - 2; t >= 0; --t) {
    for (int s = 0; s < s_len; ++s) {
      double acc = b(t + 1, s) == kNegInf
                       ? kNegInf
                       : b(t + 1, s) + y(t + 1, exp_cls[s]);
      if (s + 1 < s_len && b(t + 1, s + 1) != kNegInf) {
        acc = log_add(acc, b(t + 1, s + 1) + y(t + 1, exp_cls[s + 1]));
      }
      if (s + 2 < s_len && exp_cls[s + 2] != kBlank && exp_cls[s + 2] != exp_cls[s] &&
          b(t + 1, s + 2) != kNegInf) {
        acc = log_add(acc, b(t + 1, s + 2) + y(t + 1, exp_cls[s + 2]));
      }
      b(t, s) = acc;
    }
  }

  double log_p = a(t_len - 1, s_len - 1);
  if (s_len > 1) log_p = log_add(log_p, a(t_len - 1, s_len - 2));

  CtcLoss<S> out;
  out.loss = -log_p;
  out.logit_grads = TensorT<S>({t_len, kNumClasses});
  for (int t = 0; t < t_len; ++t) {
    double post[kNumClasses];
    std::fill(post, post + kNumClasses, kNegInf);
    for (int s = 0; s < s_len; ++s) {
      if (a(t, s) == kNegInf || b(t, s) == kNegInf) continue;
      int k = exp_cls[s];
      post[k] = log_add(post[k], a(t, s) + b(t, s));
    }
    for (int k = 0; k < kNumClasses; ++k) {
      const double softmax = std::exp(y(t, k));
      const double gamma = post[k] == kNegInf ? 0.0 : std::exp(post[k] - log_p);
      out.logit_grads(t, k) = static_cast<S>(softmax - gamma);
    }
  }
  return out;
}

template <class S>
ToneSequence greedy_decode(const TensorT<S>& logits) {
  if (logits.ndim() != 2 || logits.dim(1) != kNumClasses) {
    throw std::invalid_argument("ctc: logits must be [T][6]");
  }
  const int t_len = logits.dim(0);
  ToneSequence out;
  int prev = kBlank;
  for (int t = 0; t < t_len; ++t) {
    int best = 0;
    for (int k = 1; k < kNumClasses; ++k) {
      if (logits(t, k) > logits(t, best)) best = k;
    }
    if (best != kBlank && best != prev) out.push_back(best - 1);
    prev = best;
  }
  return out;
}

namespace {

struct BeamEntry {
  ToneSequence seq;
  double log_pb = kNegInf;   // mass ending in blank
  double log_pnb = kNegInf;  // mass ending in the last label
  double total() const { return log_add(log_pb, log_pnb); }
};

struct Candidate {
  ToneSequence seq;
  double mass = kNegInf;
  int gen_class = 0;  // class emitted this step, for greedy-compatible ties
  bool ends_blank = false;
};

}  // namespace

template <class S>
ToneSequence beam_decode(const TensorT<S>& logits, int beam_width) {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  if (logits.ndim() != 2 || logits.dim(1) != kNumClasses) {
    throw std::invalid_argument("ctc: logits must be [T][6]");
  }
  const int t_len = logits.dim(0);
  const std::vector<double> lsm = log_softmax_rows(logits);
  auto y = [&lsm](int t, int k) { return lsm[static_cast<size_t>(t) * kNumClasses + k]; };

  std::vector<BeamEntry> beam(1);
  beam[0].log_pb = 0.0;  // empty prefix, log prob 1

  std::vector<Candidate> cands;
  for (int t = 0; t < t_len; ++t) {
    cands.clear();
    for (const BeamEntry& e : beam) {
      const double tot = e.total();
      // stay via blank
      cands.push_back({e.seq, tot + y(t, kBlank), kBlank, true});
      for (int k = 1; k < kNumClasses; ++k) {
        const int tone = k - 1;
        if (!e.seq.empty() && e.seq.back() == tone) {
          // repeat emission collapses into the same prefix
          if (e.log_pnb != kNegInf) {
            cands.push_back({e.seq, e.log_pnb + y(t, k), k, false});
          }
          // extending with the same label needs a blank in between
          if (e.log_pb != kNegInf) {
            ToneSequence ext = e.seq;
            ext.push_back(tone);
            cands.push_back({std::move(ext), e.log_pb + y(t, k), k, false});
          }
        } else {
          ToneSequence ext = e.seq;
          ext.push_back(tone);
          cands.push_back({std::move(ext), tot + y(t, k), k, false});
        }
      }
    }

    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& z) {
      if (x.mass != z.mass) return x.mass > z.mass;
      if (x.gen_class != z.gen_class) return x.gen_class < z.gen_class;
      return x.seq < z.seq;
    });
    if (static_cast<int>(cands.size()) > beam_width) cands.resize(beam_width);

    // merge candidates that collapsed to the same prefix; sort order fixes
    // the log_add accumulation order
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& z) {
      if (x.seq != z.seq) return x.seq < z.seq;
      if (x.ends_blank != z.ends_blank) return x.ends_blank;
      return x.mass > z.mass;
    });
    beam.clear();
    for (Candidate& cand : cands) {
      if (beam.empty() || beam.back().seq != cand.seq) {
        beam.emplace_back();
        beam.back().seq = std::move(cand.seq);
      }
      BeamEntry& entry = beam.back();
      if (cand.ends_blank) {
        entry.log_pb = log_add(entry.log_pb, cand.mass);
      } else {
        entry.log_pnb = log_add(entry.log_pnb, cand.mass);
      }
    }
  }

  const BeamEntry* best = &beam.front();
  for (const BeamEntry& e : beam) {
    const double et = e.total();
    const double bt = best->total();
    if (et > bt || (et == bt && e.seq < best->seq)) best = &e;
  }
  return best->seq;
}

template CtcLoss<float> ctc_loss<float>(const TensorT<float>&, const ToneSequence&);
template CtcLoss<double> ctc_loss<double>(const TensorT<double>&, const ToneSequence&);
template ToneSequence greedy_decode<float>(const TensorT<float>&);
template ToneSequence greedy_decode<double>(const TensorT<double>&);
template ToneSequence beam_decode<float>(const TensorT<float>&, int);
template ToneSequence beam_decode<double>(const TensorT<double>&, int);

}  // namespace tonerec
