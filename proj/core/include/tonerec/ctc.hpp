#pragma once

#include "tonerec/tensor.hpp"
#include "tonerec/types.hpp"

namespace tonerec {

template <class S>
struct CtcLoss {
  double loss = 0.0;       // -log p(Y|X), nats
  TensorT<S> logit_grads;  // [T][6], d(loss)/d(logits)
};

// Exact CTC negative log-likelihood via the forward-backward lattice over the
// blank-augmented label sequence (blank = class 0, tone t = class t + 1).
// All lattice arithmetic is in log space with double precision.
// Throws "label longer than input" when T < U + adjacent-repeat count.
template <class S>
CtcLoss<S> ctc_loss(const TensorT<S>& logits, const ToneSequence& labels);

// Per-step argmax (ties -> lowest class index), collapse consecutive repeats,
// drop blanks.
template <class S>
ToneSequence greedy_decode(const TensorT<S>& logits);

// Prefix beam search over collapsed label prefixes with per-prefix
// blank/non-blank probability mass. Candidate extensions are pruned before
// merging, ranked by (mass, generating class, prefix); this makes width 1
// reproduce greedy decoding exactly, and a width of at least 6^T keeps every
// candidate so the true MAP label sequence is returned. Final ties go to the
// lexicographically smallest prefix.
template <class S>
ToneSequence beam_decode(const TensorT<S>& logits, int beam_width = 64);

}  // namespace tonerec
