#include "prefixgan/seg_rl.hpp"

#include <cmath>
#include <stdexcept>

namespace prefixgan {

namespace {

Vec head_mean(const Mat& scores) {
  return scores.colwise().mean().transpose();
}

std::vector<std::vector<int>> batch_prefixes(const std::vector<Sequence>& batch, int t,
                                             int n_copies) {
  std::vector<std::vector<int>> out;
  out.reserve(batch.size() * static_cast<std::size_t>(n_copies));
  for (const auto& s : batch) {
    std::vector<int> p(s.ids.begin(), s.ids.begin() + t);
    for (int n = 0; n < n_copies; ++n) out.push_back(p);
  }
  return out;
}

std::vector<Sequence> to_sequences(const std::vector<std::vector<int>>& tokens, int t_grid,
                                   int pad_id) {
  std::vector<Sequence> out;
  out.reserve(tokens.size());
  for (const auto& tk : tokens) {
    Sequence s;
    s.ids.assign(t_grid, pad_id);
    std::copy(tk.begin(), tk.end(), s.ids.begin());
    s.true_len = static_cast<int>(tk.size());
    out.push_back(std::move(s));
  }
  return out;
}

void check_batch(const std::vector<Sequence>& batch, const DiscriminatorModel& disc) {
  if (batch.empty()) throw std::invalid_argument("rewards: empty batch");
  for (const auto& s : batch)
    if (s.max_len() != disc.t_len)
      throw std::invalid_argument("rewards: batch length differs from discriminator T");
}

}  // namespace

RolloutPolicy make_rollout_policy(const GeneratorModel& gen) {
  return RolloutPolicy{gen.lm, gen.start_id};
}

std::vector<Sequence> rollout(const RolloutPolicy& policy, const Sequence& prefix,
                              int target_len, int n_rollouts, Rng& rng) {
  if (n_rollouts < 1) throw std::invalid_argument("rollout: N must be >= 1");
  if (target_len <= prefix.true_len)
    throw std::invalid_argument("rollout: target length must exceed prefix length");
  if (target_len > prefix.max_len())
    throw std::invalid_argument("rollout: target length exceeds the sequence grid");
  std::vector<int> p(prefix.ids.begin(), prefix.ids.begin() + prefix.true_len);
  const auto tokens = ancestral_sample(
      policy.lm, policy.start_id,
      std::vector<std::vector<int>>(static_cast<std::size_t>(n_rollouts), p), target_len,
      rng);
  auto out = to_sequences(tokens, prefix.max_len(), 0);
  // Preserve the caller's padding byte-for-byte past the completion.
  for (auto& s : out)
    for (int k = target_len; k < prefix.max_len(); ++k) s.ids[k] = prefix.ids[k];
  return out;
}

RewardMatrix rewards_baseline(const DiscriminatorModel& disc, const GeneratorModel& gen,
                              const std::vector<Sequence>& batch, int n_rollouts, Rng& rng) {
  if (n_rollouts < 1) throw std::invalid_argument("rewards_baseline: N must be >= 1");
  check_batch(batch, disc);
  const int bsz = static_cast<int>(batch.size());
  const int t_len = disc.t_len;
  const RolloutPolicy policy = make_rollout_policy(gen);

  RewardMatrix rm;
  rm.variant = RewardVariant::baseline;
  rm.values = Mat::Zero(bsz, t_len);
  for (int t = 1; t <= t_len; ++t) {
    std::vector<Sequence> completions;
    if (t < t_len) {
      const auto tokens = ancestral_sample(policy.lm, policy.start_id,
                                           batch_prefixes(batch, t, n_rollouts), t_len, rng);
      completions = to_sequences(tokens, t_len, disc.pad_id);
    } else {
      // The classic rollout structure scores the finished sequence once per
      // round as well; the exact value is pinned by a direct call below.
      completions.reserve(static_cast<std::size_t>(bsz) * n_rollouts);
      for (const auto& s : batch)
        for (int n = 0; n < n_rollouts; ++n) completions.push_back(s);
    }
    const Vec scores = head_mean(score_batch(disc, completions, t_len));
    for (int b = 0; b < bsz; ++b) {
      double acc = 0.0;
      for (int n = 0; n < n_rollouts; ++n) acc += scores[b * n_rollouts + n];
      rm.values(b, t - 1) = acc / n_rollouts;
    }
  }
  const Vec direct = head_mean(score_batch(disc, batch, t_len));
  for (int b = 0; b < bsz; ++b) rm.values(b, t_len - 1) = direct[b];
  return rm;
}

RewardMatrix rewards_full_prefix(const DiscriminatorModel& disc,
                                 const std::vector<Sequence>& batch) {
  check_batch(batch, disc);
  const int bsz = static_cast<int>(batch.size());
  RewardMatrix rm;
  rm.variant = RewardVariant::full_prefix;
  rm.values = Mat::Zero(bsz, disc.t_len);
  for (int t = 1; t <= disc.t_len; ++t) {
    const Vec scores = head_mean(score_batch(disc, batch, t));
    for (int b = 0; b < bsz; ++b) rm.values(b, t - 1) = scores[b];
  }
  return rm;
}

RewardMatrix rewards_two_segment(const DiscriminatorModel& disc, const GeneratorModel& gen,
                                 const std::vector<Sequence>& batch, const SegmentPlan& plan,
                                 int n_rollouts, Rng& rng) {
  if (n_rollouts < 1) throw std::invalid_argument("rewards_two_segment: N must be >= 1");
  check_batch(batch, disc);
  if (plan.t_mid < 1 || plan.t_mid >= plan.t_full || plan.t_full != disc.t_len)
    throw std::invalid_argument("rewards_two_segment: invalid segment plan");
  const int bsz = static_cast<int>(batch.size());
  const int t_len = disc.t_len;
  const RolloutPolicy policy = make_rollout_policy(gen);

  RewardMatrix rm;
  rm.variant = RewardVariant::two_segment;
  rm.values = Mat::Zero(bsz, t_len);
  for (int t = 1; t <= t_len; ++t) {
    if (t == plan.t_mid || t == plan.t_full) {
      // Direct evaluation: no Monte Carlo, no rng consumption.
      const Vec scores = head_mean(score_batch(disc, batch, t));
      for (int b = 0; b < bsz; ++b) rm.values(b, t - 1) = scores[b];
      continue;
    }
    const int target = t < plan.t_mid ? plan.t_mid : t_len;
    const auto tokens = ancestral_sample(policy.lm, policy.start_id,
                                         batch_prefixes(batch, t, n_rollouts), target, rng);
    const auto completions = to_sequences(tokens, t_len, disc.pad_id);
    const Vec scores = head_mean(score_batch(disc, completions, target));
    for (int b = 0; b < bsz; ++b) {
      double acc = 0.0;
      for (int n = 0; n < n_rollouts; ++n) acc += scores[b * n_rollouts + n];
      rm.values(b, t - 1) = acc / n_rollouts;
    }
  }
  return rm;
}

double pg_update(GeneratorModel& gen, const std::vector<Sequence>& batch,
                 const RewardMatrix& rewards, double lr) {
  const int bsz = static_cast<int>(batch.size());
  if (bsz < 1) throw std::invalid_argument("pg_update: empty batch");
  if (rewards.values.rows() != bsz || rewards.values.cols() != batch[0].max_len())
    throw std::invalid_argument("pg_update: reward shape mismatch");
  const Mat weights = rewards.values / static_cast<double>(bsz);
  auto [loss, grads] = gen_weighted_nll_grad(gen, batch, weights);
  if (!std::isfinite(loss)) throw std::runtime_error("pg_update: NaN/inf objective");
  std::vector<const Mat*> gptrs;
  for (const Mat& g : grads) gptrs.push_back(&g);
  // Minimizing the weighted NLL ascends the surrogate.
  ad::adam_step(gen.lm.params(), gptrs, gen.opt, lr, /*minimize=*/true);
  return -loss;
}

std::vector<Mat> pg_surrogate_gradient(const GeneratorModel& gen,
                                       const std::vector<Sequence>& batch,
                                       const Mat& rewards,
                                       const std::vector<double>& seq_weights) {
  const int bsz = static_cast<int>(batch.size());
  if (static_cast<int>(seq_weights.size()) != bsz)
    throw std::invalid_argument("pg_surrogate_gradient: weight count mismatch");
  Mat weights = rewards;
  for (int b = 0; b < bsz; ++b) weights.row(b) *= seq_weights[b];
  auto [loss, grads] = gen_weighted_nll_grad(gen, batch, weights);
  (void)loss;
  for (Mat& g : grads) g = -g;
  return grads;
}

namespace {

ad::Value bce_cuts_graph(ad::Tape& t, const DiscVars& v, const DiscriminatorModel& d,
                         const std::vector<Sequence>& real,
                         const std::vector<Sequence>& fake, const std::vector<int>& cuts) {
  constexpr double lo = kProbClamp;
  constexpr double hi = 1.0 - kProbClamp;
  ad::Value total;
  for (int cut : cuts) {
    ad::Value pr = t.clamp(t.sigmoid(disc_logits_graph(t, v, d, real, cut)), lo, hi);
    ad::Value pf = t.clamp(t.sigmoid(disc_logits_graph(t, v, d, fake, cut)), lo, hi);
    ad::Value real_term = t.mean_all(t.affine(t.log(pr), -1.0, 0.0));
    ad::Value fake_term = t.mean_all(t.affine(t.log(t.affine(pf, -1.0, 1.0)), -1.0, 0.0));
    ad::Value term = t.add(real_term, fake_term);
    total = total.valid() ? t.add(total, term) : term;
  }
  return total;
}

double eval_bce_cuts(const DiscriminatorModel& disc, const std::vector<Sequence>& real,
                     const std::vector<Sequence>& fake, const std::vector<int>& cuts) {
  ad::Tape tape;
  DiscVars vars = disc_vars(tape, disc, /*trainable=*/false);
  ad::Value loss = bce_cuts_graph(tape, vars, disc, real, fake, cuts);
  return tape.val(loss)(0, 0);
}

std::vector<int> all_cuts(int t_len) {
  std::vector<int> cuts(t_len);
  for (int i = 0; i < t_len; ++i) cuts[i] = i + 1;
  return cuts;
}

}  // namespace

double disc_loss_seqgan(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                        const std::vector<Sequence>& fake) {
  return eval_bce_cuts(disc, real, fake, {disc.t_len});
}

double disc_loss_full_prefix(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                             const std::vector<Sequence>& fake) {
  return eval_bce_cuts(disc, real, fake, all_cuts(disc.t_len));
}

double disc_loss_two_segment(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                             const std::vector<Sequence>& fake, const SegmentPlan& plan) {
  if (plan.t_mid < 1 || plan.t_mid >= plan.t_full)
    throw std::invalid_argument("disc_loss_two_segment: invalid plan");
  return eval_bce_cuts(disc, real, fake, {plan.t_mid, plan.t_full});
}

DiscLossBuilder make_seqgan_loss_builder(RewardVariant variant, SegmentPlan plan) {
  return [variant, plan](ad::Tape& tape, const DiscVars& vars, DiscriminatorModel& disc,
                         const std::vector<Sequence>& real,
                         const std::vector<Sequence>& fake) -> ad::Value {
    std::vector<int> cuts;
    switch (variant) {
      case RewardVariant::baseline: cuts = {disc.t_len}; break;
      case RewardVariant::full_prefix: cuts = all_cuts(disc.t_len); break;
      case RewardVariant::two_segment: cuts = {plan.t_mid, plan.t_full}; break;
    }
    return bce_cuts_graph(tape, vars, disc, real, fake, cuts);
  };
}

std::pair<double, double> seqgan_adversarial_epoch(GeneratorModel& gen,
                                                   DiscriminatorModel& disc,
                                                   const Corpus& real,
                                                   const AdversarialSettings& s, Rng& rng) {
  if (real.sequences.empty()) throw std::invalid_argument("adversarial epoch: empty corpus");
  const int t_len = real.T;
  double g_obj = 0.0;
  for (int g = 0; g < s.g_steps; ++g) {
    const auto fake = sample(gen, s.batch_size, t_len, rng);
    RewardMatrix rewards;
    switch (s.variant) {
      case RewardVariant::baseline:
        rewards = rewards_baseline(disc, gen, fake, s.n_rollouts, rng);
        break;
      case RewardVariant::full_prefix:
        rewards = rewards_full_prefix(disc, fake);
        break;
      case RewardVariant::two_segment:
        rewards = rewards_two_segment(disc, gen, fake, s.plan, s.n_rollouts, rng);
        break;
    }
    if (s.mean_baseline) {
      const Eigen::RowVectorXd mean = rewards.values.colwise().mean();
      rewards.values.rowwise() -= mean;
    }
    g_obj += pg_update(gen, fake, rewards, s.lr_g);
  }
  const DiscLossBuilder builder = make_seqgan_loss_builder(s.variant, s.plan);
  double d_loss = 0.0;
  for (int d = 0; d < s.d_steps; ++d) {
    std::vector<Sequence> real_batch;
    real_batch.reserve(s.batch_size);
    for (int i = 0; i < s.batch_size; ++i)
      real_batch.push_back(real.sequences[rng.uniform_int(static_cast<int>(real.size()))]);
    const auto fake_batch = sample(gen, s.batch_size, t_len, rng);
    d_loss += disc_update(disc, real_batch, fake_batch, builder, s.lr_d);
  }
  return {s.d_steps > 0 ? d_loss / s.d_steps : 0.0, s.g_steps > 0 ? g_obj / s.g_steps : 0.0};
}

}  // namespace prefixgan
