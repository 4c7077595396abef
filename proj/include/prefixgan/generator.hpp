#pragma once

#include "prefixgan/ad.hpp"
#include "prefixgan/lstm.hpp"

namespace prefixgan {

/// Trainable autoregressive next-token model.
struct GeneratorModel {
  LstmLm lm;
  int start_id = 1;
  ad::AdamState opt;

  void save(const std::filesystem::path& file) const;
  static GeneratorModel load(const std::filesystem::path& file);
};

GeneratorModel init_generator(std::uint64_t seed, int vocab_size, int hidden_width,
                              int start_id, double init_std = 0.1);

/// Next-token distribution given a (possibly empty) prefix of ids.
Vec step_distribution(const GeneratorModel& gen, const std::vector<int>& prefix);

/// n ancestrally sampled sequences of true_len == t_len.
std::vector<Sequence> sample(const GeneratorModel& gen, int n, int t_len, Rng& rng);

/// Sampling that also returns each sequence's accumulated log-probability
/// under the sampling-time step distributions (clamped like the scorers).
std::pair<std::vector<Sequence>, std::vector<double>> sample_with_logprob(
    const GeneratorModel& gen, int n, int t_len, Rng& rng);

/// Mean negative log-likelihood (nats/sequence) of the corpus under the
/// model; pad positions are excluded.
double nll_gen(const GeneratorModel& gen, const Corpus& corpus);

struct MlePretrainResult {
  std::vector<double> loss_curve;  // per-epoch teacher-forced CE, nats/token
};

/// Teacher-forced maximum-likelihood training with Adam. Throws on NaN loss.
MlePretrainResult mle_pretrain(GeneratorModel& gen, const Corpus& corpus, int epochs,
                               double lr, Rng& rng, int batch_size = 64);

// ---- autodiff graph surface (used by the adversarial training paths) ------

struct GenVars {
  ad::Value embed, w, b, proj, bias;
};

/// Register the generator parameters as differentiable leaves on a tape.
GenVars gen_vars(ad::Tape& tape, const GeneratorModel& gen);

std::vector<ad::Value> gen_var_list(const GenVars& v);

/// Teacher-forced weighted NLL: sum_b sum_t weights(b, t) * -log p(ids[b][t]).
/// weights is (batch x T); zero entries mask a position entirely.
ad::Value gen_weighted_nll_graph(ad::Tape& tape, const GenVars& vars, const LstmLm& arch,
                                 int start_id, const std::vector<Sequence>& batch,
                                 const Mat& weights);

/// Gradient of the weighted NLL with respect to each parameter tensor, in
/// params() order. Also returns the loss value.
std::pair<double, std::vector<Mat>> gen_weighted_nll_grad(const GeneratorModel& gen,
                                                          const std::vector<Sequence>& batch,
                                                          const Mat& weights);

}  // namespace prefixgan
