#pragma once

#include "prefixgan/discriminator.hpp"
#include "prefixgan/generator.hpp"
#include "prefixgan/seg_rl.hpp"

namespace prefixgan {

/// softmax((logits + Gumbel noise) / tau). Differentiable in logits.
Vec gumbel_softmax_step(const Vec& logits, double tau, Rng& rng);

/// Temperature over adversarial iterations: constant at the target, or an
/// exponential sweep target^(iter / warmup) from 1 toward the target.
struct TemperatureSchedule {
  enum class Shape { constant, exponential };
  double target = 1.0;
  int warmup_iters = 1;
  Shape shape = Shape::exponential;

  double at(int iter) const;
};

/// Gumbel noise for a T-step relaxed sample: one (vocab x batch) draw per step.
std::vector<Mat> draw_gumbel_noise(int t_len, int vocab, int batch, Rng& rng);

/// Length-T soft sequence sampled through the generator; the next-step input
/// is the probability-weighted embedding of the previous soft output.
SoftSequence relaxed_sample(const GeneratorModel& gen, int t_len, double tau, Rng& rng);

/// Graph form: returns one (vocab x batch) node per step, differentiable
/// w.r.t. the generator variables. noise must hold t_len (vocab x batch)
/// matrices (fixed at call time).
std::vector<ad::Value> relaxed_sample_graph(ad::Tape& tape, const GenVars& vars,
                                            const LstmLm& arch, int start_id, int batch,
                                            int t_len, double tau,
                                            const std::vector<Mat>& noise);

/// Relativistic pairing over heads, cuts and index-matched real/fake pairs:
///   (1/S) sum_s mean_b sum_{t in cuts} f(D_s(fake, t), D_s(real, t))
/// with f(y, r) = softplus(y - r) for the discriminator side and the roles
/// swapped inside f for the generator side. Requires a logit-mode model.
ad::Value relgan_loss_graph(ad::Tape& tape, const DiscVars& vars,
                            const DiscriminatorModel& arch,
                            const std::vector<Sequence>& real,
                            const std::vector<ad::Value>& soft_steps,
                            const std::vector<int>& cuts, bool generator_side);

double relgan_d_loss(const DiscriminatorModel& disc, const std::vector<Sequence>& real,
                     const std::vector<SoftSequence>& soft_fake,
                     const std::vector<int>& cuts);

double relgan_g_loss(const DiscriminatorModel& disc, const std::vector<Sequence>& real,
                     const std::vector<SoftSequence>& soft_fake,
                     const std::vector<int>& cuts);

/// Cut set for a variant: {T}, {1..T}, or the two plan cuts.
std::vector<int> relgan_cuts(RewardVariant variant, const SegmentPlan& plan, int t_len);

struct RelganSettings {
  RewardVariant variant = RewardVariant::two_segment;
  SegmentPlan plan;
  int epochs = 0;
  int g_steps = 1;
  int d_steps = 5;
  int batch_size = 64;
  double lr_g = 1e-2;
  double lr_d = 1e-3;
};

/// One adversarial epoch of the relaxed path at temperature tau; returns
/// (mean d-loss, mean g-loss).
std::pair<double, double> relgan_adversarial_epoch(GeneratorModel& gen,
                                                   DiscriminatorModel& disc,
                                                   const Corpus& real,
                                                   const RelganSettings& s, double tau,
                                                   Rng& rng);

/// Batch the per-step vectors of soft sequences into (vocab x batch) mats.
std::vector<Mat> soft_step_matrices(const std::vector<SoftSequence>& batch, int t_len);

}  // namespace prefixgan
