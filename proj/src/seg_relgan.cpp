#include "prefixgan/seg_relgan.hpp"

#include <cmath>
#include <stdexcept>

namespace prefixgan {

Vec gumbel_softmax_step(const Vec& logits, double tau, Rng& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("gumbel_softmax_step: tau must be > 0");
  Vec z(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) z[i] = (logits[i] + rng.gumbel()) / tau;
  return softmax_cols(z).col(0);
}

double TemperatureSchedule::at(int iter) const {
  if (!(target > 0.0)) throw std::invalid_argument("TemperatureSchedule: target must be > 0");
  if (shape == Shape::constant) return target;
  const int warm = std::max(1, warmup_iters);
  const double frac = std::min(1.0, static_cast<double>(std::max(0, iter)) / warm);
  return std::pow(target, frac);
}

std::vector<Mat> draw_gumbel_noise(int t_len, int vocab, int batch, Rng& rng) {
  std::vector<Mat> noise;
  noise.reserve(t_len);
  for (int t = 0; t < t_len; ++t) {
    Mat g(vocab, batch);
    for (Eigen::Index j = 0; j < batch; ++j)
      for (Eigen::Index i = 0; i < vocab; ++i) g(i, j) = rng.gumbel();
    noise.push_back(std::move(g));
  }
  return noise;
}

std::vector<ad::Value> relaxed_sample_graph(ad::Tape& tape, const GenVars& vars,
                                            const LstmLm& arch, int start_id, int batch,
                                            int t_len, double tau,
                                            const std::vector<Mat>& noise) {
  if (!(tau > 0.0)) throw std::invalid_argument("relaxed_sample_graph: tau must be > 0");
  if (static_cast<int>(noise.size()) != t_len)
    throw std::invalid_argument("relaxed_sample_graph: need one noise matrix per step");

  struct GraphState {
    ad::Value h, c;
  };
  const int hidden = arch.hidden;
  GraphState st{tape.constant(Mat::Zero(hidden, batch)),
                tape.constant(Mat::Zero(hidden, batch))};
  ad::Value x = tape.embed_cols(vars.embed, std::vector<int>(batch, start_id));
  std::vector<ad::Value> soft_steps;
  soft_steps.reserve(t_len);
  for (int t = 0; t < t_len; ++t) {
    ad::Value xh = tape.concat_rows({x, st.h});
    ad::Value z = tape.add_colvec(tape.matmul(vars.w, xh), vars.b);
    ad::Value ig = tape.sigmoid(tape.rows(z, 0, hidden));
    ad::Value fg = tape.sigmoid(tape.rows(z, hidden, hidden));
    ad::Value gg = tape.tanh(tape.rows(z, 2 * hidden, hidden));
    ad::Value og = tape.sigmoid(tape.rows(z, 3 * hidden, hidden));
    st.c = tape.add(tape.cmul(fg, st.c), tape.cmul(ig, gg));
    st.h = tape.cmul(og, tape.tanh(st.c));
    ad::Value logits = tape.add_colvec(tape.matmul(vars.proj, st.h), vars.bias);
    ad::Value soft =
        tape.softmax_cols(tape.affine(tape.add_const(logits, noise[t]), 1.0 / tau, 0.0));
    soft_steps.push_back(soft);
    if (t + 1 < t_len) x = tape.matmul(vars.embed, soft);
  }
  return soft_steps;
}

SoftSequence relaxed_sample(const GeneratorModel& gen, int t_len, double tau, Rng& rng) {
  const auto noise = draw_gumbel_noise(t_len, gen.lm.vocab, 1, rng);
  ad::Tape tape;
  GenVars vars;
  vars.embed = tape.constant(gen.lm.embed);
  vars.w = tape.constant(gen.lm.w);
  vars.b = tape.constant(gen.lm.b);
  vars.proj = tape.constant(gen.lm.proj);
  vars.bias = tape.constant(gen.lm.bias);
  const auto steps = relaxed_sample_graph(tape, vars, gen.lm, gen.start_id, 1, t_len, tau, noise);
  SoftSequence s;
  s.tau = tau;
  s.steps.reserve(t_len);
  for (ad::Value v : steps) s.steps.push_back(tape.val(v).col(0));
  return s;
}

std::vector<Mat> soft_step_matrices(const std::vector<SoftSequence>& batch, int t_len) {
  if (batch.empty()) throw std::invalid_argument("soft_step_matrices: empty batch");
  const int bsz = static_cast<int>(batch.size());
  const int vocab = static_cast<int>(batch[0].steps.at(0).size());
  std::vector<Mat> mats;
  mats.reserve(t_len);
  for (int t = 0; t < t_len; ++t) {
    Mat m(vocab, bsz);
    for (int b = 0; b < bsz; ++b) {
      if (batch[b].size() != t_len)
        throw std::invalid_argument("soft_step_matrices: ragged soft batch");
      m.col(b) = batch[b].steps[t];
    }
    mats.push_back(std::move(m));
  }
  return mats;
}

ad::Value relgan_loss_graph(ad::Tape& tape, const DiscVars& vars,
                            const DiscriminatorModel& arch,
                            const std::vector<Sequence>& real,
                            const std::vector<ad::Value>& soft_steps,
                            const std::vector<int>& cuts, bool generator_side) {
  if (cuts.empty()) throw std::invalid_argument("relgan loss: empty cut set");
  if (arch.output_mode != DiscOutput::logit)
    throw std::invalid_argument("relgan loss: discriminator must be in logit mode");
  const int bsz = static_cast<int>(real.size());
  ad::Value total;
  for (int cut : cuts) {
    ad::Value real_logits = disc_logits_graph(tape, vars, arch, real, cut);
    ad::Value fake_logits = disc_logits_graph_soft(tape, vars, arch, soft_steps, bsz, cut);
    ad::Value diff = generator_side ? tape.sub(real_logits, fake_logits)
                                    : tape.sub(fake_logits, real_logits);
    ad::Value term = tape.mean_all(tape.softplus(diff));
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

namespace {

double eval_relgan_loss(const DiscriminatorModel& disc, const std::vector<Sequence>& real,
                        const std::vector<SoftSequence>& soft_fake,
                        const std::vector<int>& cuts, bool generator_side) {
  if (real.size() != soft_fake.size())
    throw std::invalid_argument("relgan loss: real/fake batch sizes must match");
  if (real.empty()) throw std::invalid_argument("relgan loss: empty batch");
  ad::Tape tape;
  DiscVars vars = disc_vars(tape, disc, /*trainable=*/false);
  const auto mats = soft_step_matrices(soft_fake, disc.t_len);
  std::vector<ad::Value> steps;
  steps.reserve(mats.size());
  for (const Mat& m : mats) steps.push_back(tape.constant(m));
  ad::Value loss = relgan_loss_graph(tape, vars, disc, real, steps, cuts, generator_side);
  return tape.val(loss)(0, 0);
}

}  // namespace

double relgan_d_loss(const DiscriminatorModel& disc, const std::vector<Sequence>& real,
                     const std::vector<SoftSequence>& soft_fake,
                     const std::vector<int>& cuts) {
  return eval_relgan_loss(disc, real, soft_fake, cuts, /*generator_side=*/false);
}

double relgan_g_loss(const DiscriminatorModel& disc, const std::vector<Sequence>& real,
                     const std::vector<SoftSequence>& soft_fake,
                     const std::vector<int>& cuts) {
  return eval_relgan_loss(disc, real, soft_fake, cuts, /*generator_side=*/true);
}

std::vector<int> relgan_cuts(RewardVariant variant, const SegmentPlan& plan, int t_len) {
  switch (variant) {
    case RewardVariant::baseline: return {t_len};
    case RewardVariant::full_prefix: {
      std::vector<int> cuts(t_len);
      for (int i = 0; i < t_len; ++i) cuts[i] = i + 1;
      return cuts;
    }
    case RewardVariant::two_segment: return {plan.t_mid, plan.t_full};
  }
  throw std::logic_error("relgan_cuts: unknown variant");
}

std::pair<double, double> relgan_adversarial_epoch(GeneratorModel& gen,
                                                   DiscriminatorModel& disc,
                                                   const Corpus& real,
                                                   const RelganSettings& s, double tau,
                                                   Rng& rng) {
  if (real.sequences.empty()) throw std::invalid_argument("relgan epoch: empty corpus");
  const int t_len = real.T;
  const auto cuts = relgan_cuts(s.variant, s.plan, t_len);

  auto draw_real = [&]() {
    std::vector<Sequence> batch;
    batch.reserve(s.batch_size);
    for (int i = 0; i < s.batch_size; ++i)
      batch.push_back(real.sequences[rng.uniform_int(static_cast<int>(real.size()))]);
    return batch;
  };

  double g_loss_sum = 0.0;
  for (int g = 0; g < s.g_steps; ++g) {
    const auto noise = draw_gumbel_noise(t_len, gen.lm.vocab, s.batch_size, rng);
    const auto real_batch = draw_real();
    ad::Tape tape;
    GenVars gvars = gen_vars(tape, gen);
    DiscVars dvars = disc_vars(tape, disc, /*trainable=*/false);
    const auto soft =
        relaxed_sample_graph(tape, gvars, gen.lm, gen.start_id, s.batch_size, t_len, tau, noise);
    ad::Value loss =
        relgan_loss_graph(tape, dvars, disc, real_batch, soft, cuts, /*generator_side=*/true);
    const double value = tape.val(loss)(0, 0);
    if (!std::isfinite(value)) throw std::runtime_error("relgan g-step: NaN/inf loss");
    tape.backward(loss);
    std::vector<Mat> storage;
    std::vector<const Mat*> gptrs;
    for (ad::Value v : gen_var_list(gvars)) storage.push_back(tape.grad(v));
    for (const Mat& m : storage) gptrs.push_back(&m);
    ad::adam_step(gen.lm.params(), gptrs, gen.opt, s.lr_g, /*minimize=*/true);
    g_loss_sum += value;
  }

  double d_loss_sum = 0.0;
  for (int d = 0; d < s.d_steps; ++d) {
    const auto noise = draw_gumbel_noise(t_len, gen.lm.vocab, s.batch_size, rng);
    const auto real_batch = draw_real();
    // Sample the relaxed fakes without gradient tracking, then train the
    // discriminator against them as constants.
    ad::Tape sample_tape;
    GenVars cvars;
    cvars.embed = sample_tape.constant(gen.lm.embed);
    cvars.w = sample_tape.constant(gen.lm.w);
    cvars.b = sample_tape.constant(gen.lm.b);
    cvars.proj = sample_tape.constant(gen.lm.proj);
    cvars.bias = sample_tape.constant(gen.lm.bias);
    const auto sampled = relaxed_sample_graph(sample_tape, cvars, gen.lm, gen.start_id,
                                              s.batch_size, t_len, tau, noise);
    ad::Tape tape;
    DiscVars dvars = disc_vars(tape, disc, /*trainable=*/true);
    std::vector<ad::Value> soft;
    soft.reserve(sampled.size());
    for (ad::Value v : sampled) soft.push_back(tape.constant(sample_tape.val(v)));
    ad::Value loss =
        relgan_loss_graph(tape, dvars, disc, real_batch, soft, cuts, /*generator_side=*/false);
    const double value = tape.val(loss)(0, 0);
    if (!std::isfinite(value)) throw std::runtime_error("relgan d-step: NaN/inf loss");
    tape.backward(loss);
    std::vector<Mat> storage;
    std::vector<const Mat*> gptrs;
    for (ad::Value v : disc_var_list(dvars)) storage.push_back(tape.grad(v));
    for (const Mat& m : storage) gptrs.push_back(&m);
    ad::adam_step(disc.params(), gptrs, disc.opt, s.lr_d, /*minimize=*/true);
    d_loss_sum += value;
  }
  return {s.d_steps > 0 ? d_loss_sum / s.d_steps : 0.0,
          s.g_steps > 0 ? g_loss_sum / s.g_steps : 0.0};
}

}  // namespace prefixgan
