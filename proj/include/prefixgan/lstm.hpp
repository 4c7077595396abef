#pragma once

#include <vector>

#include "prefixgan/corpus.hpp"
#include "prefixgan/numeric.hpp"
#include "prefixgan/rng.hpp"

namespace prefixgan {

/// Single-layer LSTM language model with tied embedding/hidden width.
/// Plain parameter container plus forward-only math; training-time graphs
/// mirror these equations on an autodiff tape.
struct LstmLm {
  int vocab = 0;
  int hidden = 0;
  Mat embed;  // hidden x vocab
  Mat w;      // 4*hidden x 2*hidden, gate order [input; forget; cell; output]
  Mat b;      // 4*hidden x 1
  Mat proj;   // vocab x hidden
  Mat bias;   // vocab x 1

  /// Batched recurrent state; column j is an independent stream.
  struct State {
    Mat h;
    Mat c;
  };

  void init(int vocab_size, int hidden_width, Rng& rng, double stddev);

  std::vector<Mat*> params();
  std::vector<const Mat*> params() const;

  State initial_state(int batch) const;
  /// Consume one token id per stream (ids outside [0, vocab) are fed as 0;
  /// callers mask the corresponding outputs).
  void step_ids(const std::vector<int>& ids, State& state) const;
  /// Consume a probability-weighted embedding mix; soft is (vocab x batch).
  void step_soft(const Mat& soft, State& state) const;
  Mat logits(const State& state) const;  // vocab x batch
  Mat probs(const State& state) const { return softmax_cols(logits(state)); }
};

/// Next-token distribution after consuming [start_id, prefix...].
Vec step_distribution(const LstmLm& lm, int start_id, const std::vector<int>& prefix);

/// Ancestral sampling. All streams consume [start_id, shared-length prefix]
/// then sample until target_len tokens total. Returns one token vector per
/// stream; with empty prefixes this samples target_len tokens from scratch.
std::vector<std::vector<int>> ancestral_sample(const LstmLm& lm, int start_id,
                                               const std::vector<std::vector<int>>& prefixes,
                                               int target_len, Rng& rng);

/// Per-sequence negative log-likelihood, teacher-forced from start_id and
/// masked to true_len. Ids outside [0, vocab) score the clamp floor.
std::vector<double> sequence_nlls(const LstmLm& lm, int start_id,
                                  const std::vector<Sequence>& seqs,
                                  double clamp_eps = kProbClamp);

/// FNV-1a over the raw parameter bytes; used for cheap identity checks.
std::uint64_t param_checksum(const LstmLm& lm);

}  // namespace prefixgan
