#pragma once

#include "prefixgan/discriminator.hpp"
#include "prefixgan/generator.hpp"

namespace prefixgan {

enum class RewardVariant { baseline, full_prefix, two_segment };

/// Per-(sample, timestep) scalar credit feeding the policy gradient.
/// values(b, t-1) is the reward for emitting token t of sample b.
struct RewardMatrix {
  Mat values;  // batch x T
  RewardVariant variant = RewardVariant::baseline;
};

/// Frozen copy of the generator used to complete prefixes.
struct RolloutPolicy {
  LstmLm lm;
  int start_id = 1;
};

RolloutPolicy make_rollout_policy(const GeneratorModel& gen);

/// N ancestral completions of the first prefix_len tokens of `prefix` to
/// exactly target_len tokens. Requires prefix_len < target_len <= T.
std::vector<Sequence> rollout(const RolloutPolicy& policy, const Sequence& prefix,
                              int target_len, int n_rollouts, Rng& rng);

/// Monte Carlo rewards with full-length completions: every column is the
/// mean of N rollout scores, and the terminal column is pinned to the exact
/// full-sequence score afterwards. Head scores are averaged.
RewardMatrix rewards_baseline(const DiscriminatorModel& disc, const GeneratorModel& gen,
                              const std::vector<Sequence>& batch, int n_rollouts, Rng& rng);

/// Direct prefix scores for every cut: exactly T evaluations per sample and
/// no Monte Carlo sampling.
RewardMatrix rewards_full_prefix(const DiscriminatorModel& disc,
                                 const std::vector<Sequence>& batch);

/// Two-segment rewards: columns before t_mid use completions to t_mid scored
/// at that cut, columns strictly between the cuts use full-length
/// completions, and the two cut columns are exact direct scores.
RewardMatrix rewards_two_segment(const DiscriminatorModel& disc, const GeneratorModel& gen,
                                 const std::vector<Sequence>& batch, const SegmentPlan& plan,
                                 int n_rollouts, Rng& rng);

/// One ascent step on the REINFORCE surrogate
///   (1/B) sum_b sum_t log G(y_t | Y_{1:t-1}) * Q(b, t),
/// rewards treated as constants. Returns the surrogate value. Throws on NaN.
double pg_update(GeneratorModel& gen, const std::vector<Sequence>& batch,
                 const RewardMatrix& rewards, double lr);

/// Expected-surrogate gradient for an explicitly weighted set of sequences
/// (weights need not be uniform; used for exact-enumeration checks).
/// Returns gradients of sum_b seq_weight[b] * sum_t log G(y_t|.) * Q(b, t)
/// with respect to each parameter tensor, in params() order.
std::vector<Mat> pg_surrogate_gradient(const GeneratorModel& gen,
                                       const std::vector<Sequence>& batch,
                                       const Mat& rewards,
                                       const std::vector<double>& seq_weights);

// ---- discriminator objectives ----------------------------------------------

/// Binary cross-entropy on full sequences (probability mode, clamped).
double disc_loss_seqgan(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                        const std::vector<Sequence>& fake);

/// Cross-entropy summed over every cut t = 1..T.
double disc_loss_full_prefix(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                             const std::vector<Sequence>& fake);

/// Cross-entropy over exactly the two plan cuts.
double disc_loss_two_segment(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                             const std::vector<Sequence>& fake, const SegmentPlan& plan);

/// Graph builder form of the above, for disc_update.
DiscLossBuilder make_seqgan_loss_builder(RewardVariant variant, SegmentPlan plan);

// ---- training loop ----------------------------------------------------------

struct AdversarialSettings {
  RewardVariant variant = RewardVariant::two_segment;
  SegmentPlan plan;
  int epochs = 0;
  int g_steps = 1;
  int d_steps = 5;
  int batch_size = 64;
  int n_rollouts = 16;
  double lr_g = 1e-2;
  double lr_d = 1e-3;
  bool mean_baseline = false;  // optional variance-reduction subtraction
};

/// One adversarial epoch of the policy-gradient path; returns (mean d-loss,
/// mean g-objective).
std::pair<double, double> seqgan_adversarial_epoch(GeneratorModel& gen,
                                                   DiscriminatorModel& disc,
                                                   const Corpus& real,
                                                   const AdversarialSettings& s, Rng& rng);

}  // namespace prefixgan
