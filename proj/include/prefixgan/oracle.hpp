#pragma once

#include <functional>

#include "prefixgan/lstm.hpp"

namespace prefixgan {

/// Ground-truth density for the synthetic benchmark: a frozen LSTM whose
/// parameters are drawn once from N(0, 1). Its token space is the content
/// vocabulary only (no specials); pipelines that interleave it with models
/// over an extended vocabulary map ids before scoring.
struct OracleModel {
  LstmLm lm;
  std::uint64_t seed = 0;

  int vocab_size() const { return lm.vocab; }
  int hidden_width() const { return lm.hidden; }

  void save(const std::filesystem::path& file) const;
  static OracleModel load(const std::filesystem::path& file);
};

/// Oracle sequences are generated from a fixed start input; index 0 of the
/// oracle's own token space doubles as that start symbol.
inline constexpr int kOracleStartId = 0;

OracleModel init_oracle(std::uint64_t seed, int vocab_size, int hidden_width);

/// N fixed-length sequences ancestrally sampled from the oracle, in the
/// oracle's own id space (true_len == T for every sequence).
Corpus oracle_sample(const OracleModel& oracle, int n, int t_len, Rng& rng);

/// Mean and Monte Carlo standard error of a sequence-level estimate.
struct NllEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  int n = 0;
};

using SamplerFn = std::function<std::vector<Sequence>(int n, int t_len, Rng& rng)>;

/// Mean oracle negative log-likelihood (nats/sequence) of sampler output.
/// Token ids outside the oracle's space score the probability clamp floor,
/// so the result is bounded by t_len * -log(clamp).
NllEstimate nll_oracle(const OracleModel& oracle, const SamplerFn& sampler, int n_samples,
                       int t_len, Rng& rng);

/// NLL of already-drawn sequences (oracle id space).
NllEstimate nll_oracle_of(const OracleModel& oracle, const std::vector<Sequence>& seqs);

}  // namespace prefixgan
