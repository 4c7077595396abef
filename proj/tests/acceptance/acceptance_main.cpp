// Acceptance suite: one check per release criterion, one pass/fail line each.
//
// Usage: acceptance_tests [criterion-name ...]   (default: run everything)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "bleu_oracle.hpp"
#include "prefixgan/runner.hpp"

using namespace prefixgan;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = false;
  bool soft = false;  // soft failure: investigation required, not rejection
  std::string detail;
};

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared tiny instance: 3-token space, T = 3, frozen random models. Token 0
// doubles as the start/pad symbol so the policy's support is exactly the
// 27 enumerable sequences.
// ---------------------------------------------------------------------------

struct TinyInstance {
  GeneratorModel gen;
  DiscriminatorModel disc;
};

TinyInstance make_tiny() {
  return TinyInstance{
      init_generator(2024, 3, 4, 0, 0.4),
      init_discriminator(77, 3, 3, 4, 3, {2}, 1, 0, DiscOutput::probability, 0.4)};
}

Sequence seq3(int a, int b, int c) {
  Sequence s;
  s.ids = {a, b, c};
  s.true_len = 3;
  return s;
}

/// Exact policy probability of a full sequence.
double seq_prob(const GeneratorModel& gen, const Sequence& s) {
  double p = 1.0;
  for (int t = 0; t < s.true_len; ++t) {
    const std::vector<int> prefix(s.ids.begin(), s.ids.begin() + t);
    p *= step_distribution(gen, prefix)[s.ids[t]];
  }
  return p;
}

/// Exact E[D(Y_{1:score_cut}) | first t tokens], completions to target_len
/// enumerated via chained step distributions (independent of rollout code).
double exact_q(const GeneratorModel& gen, const DiscriminatorModel& disc,
               const Sequence& base, int t, int target_len, int score_cut) {
  double total = 0.0;
  std::function<void(std::vector<int>&, double)> recurse = [&](std::vector<int>& ids,
                                                               double prob) {
    if (static_cast<int>(ids.size()) == target_len) {
      std::vector<int> padded = ids;
      padded.resize(disc.t_len, disc.pad_id);
      Sequence s;
      s.ids = padded;
      s.true_len = target_len;
      total += prob * score_prefix(disc, s, score_cut).scores[0];
      return;
    }
    const Vec p = step_distribution(gen, ids);
    for (int tok = 0; tok < gen.lm.vocab; ++tok) {
      ids.push_back(tok);
      recurse(ids, prob * p[tok]);
      ids.pop_back();
    }
  };
  std::vector<int> prefix(base.ids.begin(), base.ids.begin() + t);
  recurse(prefix, 1.0);
  return total;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

Result reward_oracle_enumeration() {
  const double t0 = now_s();
  TinyInstance tiny = make_tiny();
  Rng rng(5);
  const auto batch = sample(tiny.gen, 3, 3, rng);
  const int n_mc = 20000;

  Rng mc_rng(17);
  const RewardMatrix base = rewards_baseline(tiny.disc, tiny.gen, batch, n_mc, mc_rng);
  const SegmentPlan plan{2, 3};
  const RewardMatrix two = rewards_two_segment(tiny.disc, tiny.gen, batch, plan, n_mc, mc_rng);

  double worst = 0.0;
  for (int b = 0; b < 3; ++b) {
    for (int t = 1; t <= 3; ++t) {
      const double exact_base =
          t < 3 ? exact_q(tiny.gen, tiny.disc, batch[b], t, 3, 3)
                : score_prefix(tiny.disc, batch[b], 3).scores[0];
      worst = std::max(worst, std::abs(base.values(b, t - 1) - exact_base));
      double exact_two;
      if (t == 1)
        exact_two = exact_q(tiny.gen, tiny.disc, batch[b], t, 2, 2);
      else
        exact_two = score_prefix(tiny.disc, batch[b], t).scores[0];
      worst = std::max(worst, std::abs(two.values(b, t - 1) - exact_two));
    }
  }
  const double dt = now_s() - t0;
  Result r;
  r.pass = worst < 0.01 && dt < 60.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |MC - exact| = %.5f (tol 0.01), %.1fs (limit 60s)",
                worst, dt);
  r.detail = buf;
  return r;
}

Result reinforce_gradient() {
  const double t0 = now_s();
  TinyInstance tiny = make_tiny();

  // All 27 sequences with their policy probabilities and exact action values
  // (terminal-reward objective: every Q column conditions on the prefix and
  // expects the full-sequence score).
  std::vector<Sequence> all;
  std::vector<double> weights;
  Mat rewards(27, 3);
  std::vector<double> disc_full(27);
  int row = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        const Sequence s = seq3(a, b, c);
        all.push_back(s);
        weights.push_back(seq_prob(tiny.gen, s));
        rewards(row, 0) = exact_q(tiny.gen, tiny.disc, s, 1, 3, 3);
        rewards(row, 1) = exact_q(tiny.gen, tiny.disc, s, 2, 3, 3);
        rewards(row, 2) = score_prefix(tiny.disc, s, 3).scores[0];
        disc_full[row] = rewards(row, 2);
        ++row;
      }

  const auto grads = pg_surrogate_gradient(tiny.gen, all, rewards, weights);

  // Enumerated expected reward J(theta) = sum_Y p(Y) D(Y).
  auto expected_reward = [&](const GeneratorModel& g) {
    const auto nlls = sequence_nlls(g.lm, g.start_id, all, 1e-300);
    double j = 0.0;
    for (int i = 0; i < 27; ++i) j += std::exp(-nlls[i]) * disc_full[i];
    return j;
  };

  const double step = 1e-4;
  double worst_rel = 0.0;
  int checked = 0;
  const auto params = tiny.gen.lm.params();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Mat& p = *tiny.gen.lm.params()[pi];
    for (int idx = 0; idx < p.size(); ++idx) {
      const double analytic = grads[pi].data()[idx];
      if (std::abs(analytic) <= 1e-6) continue;
      const double orig = p.data()[idx];
      p.data()[idx] = orig + step;
      const double up = expected_reward(tiny.gen);
      p.data()[idx] = orig - step;
      const double dn = expected_reward(tiny.gen);
      p.data()[idx] = orig;
      const double fd = (up - dn) / (2 * step);
      const double rel = std::abs(fd - analytic) / std::max(std::abs(fd), std::abs(analytic));
      worst_rel = std::max(worst_rel, rel);
      ++checked;
    }
  }
  const double dt = now_s() - t0;
  Result r;
  r.pass = checked > 0 && worst_rel < 1e-3 && dt < 300.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d coordinates, worst rel err = %.2e (tol 1e-3), %.1fs (limit 300s)",
                checked, worst_rel, dt);
  r.detail = buf;
  return r;
}

Result zero_variance_cells() {
  const GeneratorModel gen = init_generator(31, 12, 8, 1, 0.3);
  const DiscriminatorModel disc =
      init_discriminator(32, 12, 6, 6, 4, {2, 3}, 1, 0, DiscOutput::probability);
  Rng batch_rng(33);
  const auto batch = sample(gen, 8, 6, batch_rng);
  const SegmentPlan plan{3, 6};
  Rng ra(1001), rb(424242);
  const RewardMatrix a = rewards_two_segment(disc, gen, batch, plan, 16, ra);
  const RewardMatrix b = rewards_two_segment(disc, gen, batch, plan, 16, rb);
  bool identical = true;
  for (int i = 0; i < 8; ++i) {
    identical = identical && a.values(i, plan.t_mid - 1) == b.values(i, plan.t_mid - 1);
    identical = identical && a.values(i, plan.t_full - 1) == b.values(i, plan.t_full - 1);
  }
  const bool mc_differs = (a.values.col(0) - b.values.col(0)).cwiseAbs().maxCoeff() > 0.0;
  Result r;
  r.pass = identical && mc_differs;
  r.detail = identical ? "cut columns bit-identical across rng seeds"
                       : "cut columns differ across rng seeds";
  return r;
}

Result masking_invariance() {
  const DiscriminatorModel disc =
      init_discriminator(41, 12, 8, 6, 5, {2, 3}, 2, 0, DiscOutput::probability);
  Rng rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Sequence s;
    s.true_len = 8;
    for (int k = 0; k < 8; ++k) s.ids.push_back(1 + rng.uniform_int(11));
    for (int t = 1; t <= 8; ++t) {
      Sequence perturbed = s;
      for (int k = t; k < 8; ++k) perturbed.ids[k] = 1 + rng.uniform_int(11);
      const auto a = score_prefix(disc, s, t);
      const auto b = score_prefix(disc, perturbed, t);
      for (int h = 0; h < disc.heads; ++h)
        worst = std::max(worst, std::abs(a.scores[h] - b.scores[h]));
    }
  }
  Result r;
  r.pass = worst == 0.0;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max |delta| over 100x8 prefix scores = %g (must be 0)",
                worst);
  r.detail = buf;
  return r;
}

Result relaxed_gradient() {
  double worst_rel = 0.0;
  double worst_onehot = 0.0;

  // (a) score_soft vs finite differences on the soft inputs.
  {
    const DiscriminatorModel disc =
        init_discriminator(51, 8, 5, 4, 3, {2}, 1, 0, DiscOutput::logit, 0.3);
    Rng rng(52);
    SoftSequence soft;
    for (int t = 0; t < 5; ++t) {
      Vec v(8);
      for (int i = 0; i < 8; ++i) v[i] = rng.uniform() + 0.1;
      soft.steps.push_back(v / v.sum());
    }
    const int cut = 4;
    const auto grads = score_soft_input_grad(disc, soft, cut, 0);
    const double step = 1e-4;
    for (int t = 0; t < cut; ++t) {
      for (int i = 0; i < 8; ++i) {
        SoftSequence up = soft, dn = soft;
        up.steps[t][i] += step;
        dn.steps[t][i] -= step;
        const double fd =
            (score_soft(disc, up, cut).scores[0] - score_soft(disc, dn, cut).scores[0]) /
            (2 * step);
        if (std::abs(grads[t][i]) <= 1e-6 && std::abs(fd) <= 1e-6) continue;
        worst_rel = std::max(worst_rel, std::abs(grads[t][i] - fd) /
                                            std::max(std::abs(fd), std::abs(grads[t][i])));
      }
    }
  }

  // (b) relaxed_sample parameter gradients under fixed noise.
  {
    GeneratorModel gen = init_generator(53, 5, 3, 1, 0.4);
    const int t_len = 3;
    const double tau = 1.5;
    Rng noise_rng(54);
    const auto noise = draw_gumbel_noise(t_len, 5, 1, noise_rng);
    Rng wr(55);
    std::vector<Vec> read;
    for (int t = 0; t < t_len; ++t) {
      Vec v(5);
      for (int i = 0; i < 5; ++i) v[i] = wr.normal();
      read.push_back(v);
    }
    auto scalar_of = [&](const GeneratorModel& g) {
      ad::Tape tape;
      GenVars vars;
      vars.embed = tape.constant(g.lm.embed);
      vars.w = tape.constant(g.lm.w);
      vars.b = tape.constant(g.lm.b);
      vars.proj = tape.constant(g.lm.proj);
      vars.bias = tape.constant(g.lm.bias);
      const auto steps =
          relaxed_sample_graph(tape, vars, g.lm, g.start_id, 1, t_len, tau, noise);
      double acc = 0.0;
      for (int t = 0; t < t_len; ++t) acc += read[t].dot(tape.val(steps[t]).col(0));
      return acc;
    };
    ad::Tape tape;
    GenVars vars = gen_vars(tape, gen);
    const auto steps =
        relaxed_sample_graph(tape, vars, gen.lm, gen.start_id, 1, t_len, tau, noise);
    ad::Value total;
    for (int t = 0; t < t_len; ++t) {
      ad::Value term = tape.sum_all(tape.cmul(steps[t], tape.constant(Mat(read[t]))));
      total = total.valid() ? tape.add(total, term) : term;
    }
    tape.backward(total);
    const auto var_list = gen_var_list(vars);
    const double step = 1e-4;
    for (std::size_t pi = 0; pi < var_list.size(); ++pi) {
      const Mat analytic = tape.grad(var_list[pi]);
      Mat& p = *gen.lm.params()[pi];
      for (int idx = 0; idx < p.size(); ++idx) {
        const double a = analytic.data()[idx];
        if (std::abs(a) <= 1e-6) continue;
        const double orig = p.data()[idx];
        p.data()[idx] = orig + step;
        const double up = scalar_of(gen);
        p.data()[idx] = orig - step;
        const double dn = scalar_of(gen);
        p.data()[idx] = orig;
        const double fd = (up - dn) / (2 * step);
        worst_rel =
            std::max(worst_rel, std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)));
      }
    }
  }

  // (c) one-hot soft input reproduces discrete scoring.
  {
    const DiscriminatorModel disc =
        init_discriminator(56, 9, 6, 5, 4, {2, 3}, 2, 0, DiscOutput::probability);
    Rng rng(57);
    for (int trial = 0; trial < 20; ++trial) {
      Sequence s;
      s.true_len = 6;
      for (int k = 0; k < 6; ++k) s.ids.push_back(1 + rng.uniform_int(8));
      SoftSequence soft;
      for (int id : s.ids) {
        Vec v = Vec::Zero(9);
        v[id] = 1.0;
        soft.steps.push_back(v);
      }
      for (int t : {1, 3, 6}) {
        const auto d = score_prefix(disc, s, t);
        const auto sf = score_soft(disc, soft, t);
        for (int h = 0; h < disc.heads; ++h)
          worst_onehot = std::max(worst_onehot, std::abs(d.scores[h] - sf.scores[h]));
      }
    }
  }

  Result r;
  r.pass = worst_rel < 1e-3 && worst_onehot < 1e-6;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "worst FD rel err = %.2e (tol 1e-3), one-hot gap = %.2e (tol 1e-6)",
                worst_rel, worst_onehot);
  r.detail = buf;
  return r;
}

Result gumbel_max_property() {
  Rng rng(61);
  Vec logits(5);
  logits << 0.7, -0.4, 1.1, 0.0, -1.0;
  const Vec target = softmax_cols(logits).col(0);
  const int draws = 50000;
  Vec counts = Vec::Zero(5);
  for (int i = 0; i < draws; ++i) {
    const Vec p = gumbel_softmax_step(logits, 1.0, rng);
    int arg = 0;
    p.maxCoeff(&arg);
    counts[arg] += 1.0;
  }
  double worst_z = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double freq = counts[k] / draws;
    const double sigma = std::sqrt(target[k] * (1.0 - target[k]) / draws);
    worst_z = std::max(worst_z, std::abs(freq - target[k]) / sigma);
  }

  Vec spread(4);
  spread << 1.0, 5.0, 9.0, -3.0;
  int sharp = 0;
  const int sharp_draws = 10000;
  for (int i = 0; i < sharp_draws; ++i)
    if (gumbel_softmax_step(spread, 0.01, rng).maxCoeff() > 0.99) ++sharp;
  const double sharp_frac = static_cast<double>(sharp) / sharp_draws;

  Result r;
  r.pass = worst_z <= 3.0 && sharp_frac >= 0.99;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "worst argmax z = %.2f (limit 3), sharp frac = %.4f (min 0.99)", worst_z,
                sharp_frac);
  r.detail = buf;
  return r;
}

Result metric_oracles() {
  using pgan_test::Tokens;
  // BLEU against the brute-force counter.
  const std::vector<Tokens> refs{
      tokenize("the quick brown fox jumps over the lazy dog"),
      tokenize("a quick brown dog jumps on the log"),
      tokenize("the lazy fox sleeps"),
  };
  const std::vector<Tokens> hyps{
      tokenize("the quick brown dog jumps over the log"),
      tokenize("a lazy fox sleeps on the dog"),
      tokenize("quick quick quick the the"),
  };
  double worst_bleu = 0.0;
  for (int n = 2; n <= 5; ++n) {
    double oracle_mean = 0.0;
    for (const auto& h : hyps) oracle_mean += pgan_test::bleu_oracle(h, refs, n);
    oracle_mean /= hyps.size();
    worst_bleu = std::max(worst_bleu, std::abs(bleu(hyps, refs, n).scores[n] - oracle_mean));
  }

  // Uniform model: NLL_gen == T ln |V|.
  GeneratorModel flat = init_generator(71, 4, 6, 1, 0.3);
  flat.lm.proj.setZero();
  flat.lm.bias.setZero();
  Corpus c;
  c.T = 3;
  for (const auto& ids : {std::vector<int>{1, 2, 3}, std::vector<int>{3, 1, 2}}) {
    Sequence s;
    s.ids = ids;
    s.true_len = 3;
    c.sequences.push_back(s);
  }
  c.t_ave = 1;
  const double nll_gap = std::abs(nll_gen(flat, c) - 3.0 * std::log(4.0));

  // Oracle self-NLL: two disjoint 5000-sample estimates.
  const OracleModel oracle = init_oracle(7, 50, 32);
  const SamplerFn self = [&oracle](int n, int t_len, Rng& rng) {
    return oracle_sample(oracle, n, t_len, rng).sequences;
  };
  Rng rng(72);
  const NllEstimate e1 = nll_oracle(oracle, self, 5000, 20, rng);
  const NllEstimate e2 = nll_oracle(oracle, self, 5000, 20, rng);
  const double combined = std::sqrt(e1.std_err * e1.std_err + e2.std_err * e2.std_err);
  const double gap = std::abs(e1.mean - e2.mean);

  Result r;
  r.pass = worst_bleu < 1e-9 && nll_gap < 1e-6 && gap < 3.0 * combined;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "bleu gap %.1e (tol 1e-9); uniform nll gap %.1e (tol 1e-6); "
                "self-NLL gap %.4f vs 3se %.4f",
                worst_bleu, nll_gap, gap, 3.0 * combined);
  r.detail = buf;
  return r;
}

Result call_count() {
  const GeneratorModel gen = init_generator(81, 12, 8, 1, 0.3);
  const DiscriminatorModel disc =
      init_discriminator(82, 12, 10, 6, 4, {2, 3}, 1, 0, DiscOutput::probability);
  Rng rng(83);
  const auto batch = sample(gen, 8, 10, rng);
  const int n_mc = 16;

  const long c0 = disc.score_count;
  rewards_full_prefix(disc, batch);
  const long full_calls = disc.score_count - c0;

  const long c1 = disc.score_count;
  rewards_baseline(disc, gen, batch, n_mc, rng);
  const long base_calls = disc.score_count - c1;

  Result r;
  const long expect_full = 10L * 8;
  const long expect_base = (10L * n_mc + 1) * 8;
  r.pass = full_calls == expect_full && base_calls == expect_base;
  char buf[160];
  std::snprintf(
      buf, sizeof(buf),
      "full_prefix %ld calls (expect T*B = %ld); baseline %ld (expect (T*N+1)*B = %ld)",
      full_calls, expect_full, base_calls, expect_base);
  r.detail = buf;
  return r;
}

TrainConfig desk_config(const fs::path& out_dir, const std::string& algorithm,
                        const std::string& variant) {
  TrainConfig cfg;
  cfg.mode = "synthetic";
  cfg.algorithm = algorithm;
  cfg.variant = variant;
  cfg.out_dir = out_dir.string();
  cfg.seeds = {11, 12, 13, 14, 15};
  cfg.t_max = 10;
  cfg.vocab_cap = 50;
  cfg.oracle_seed = 1234;
  cfg.oracle_hidden = 32;
  cfg.gen_hidden = 32;
  cfg.disc_emb = 32;
  cfg.disc_filters = 16;
  cfg.disc_filter_sizes = {2, 3};
  cfg.n_train_synthetic = 1500;
  cfg.n_test_synthetic = 400;
  cfg.n_eval_samples = 250;
  cfg.batch_size = 32;
  cfg.pretrain_epochs = 6;
  cfg.adv_epochs = 12;
  cfg.g_steps = 1;
  cfg.d_steps = 2;
  cfg.rollout_n = 8;
  cfg.lr_pretrain = 1e-2;
  cfg.lr_g = 5e-3;
  cfg.lr_d = 1e-3;
  cfg.tau_target = 10.0;
  cfg.tau_warmup = 12;
  cfg.wall_clock = false;
  return cfg;
}

double median_final_nll_oracle(const fs::path& run_dir) {
  auto finals = load_run_finals(run_dir);
  std::vector<double> vals;
  for (const auto& f : finals) {
    if (!f.record.nll_oracle) throw std::runtime_error("missing nll_oracle in finals");
    vals.push_back(*f.record.nll_oracle);
  }
  std::sort(vals.begin(), vals.end());
  return vals[vals.size() / 2];
}

Result directional_experiment() {
  const double t0 = now_s();
  const fs::path root = fs::path("acceptance_artifacts") / "directional";
  fs::remove_all(root);
  fs::create_directories(root);

  struct Arm {
    std::string algorithm, variant;
    double median = 0.0;
  };
  std::vector<Arm> arms = {{"seqgan", "baseline"},
                           {"seqgan", "two_segment"},
                           {"relgan", "baseline"},
                           {"relgan", "two_segment"}};
  for (auto& arm : arms) {
    const fs::path dir = root / (arm.algorithm + "_" + arm.variant);
    const TrainConfig cfg = desk_config(dir, arm.algorithm, arm.variant);
    const int rc = run_experiment(cfg);
    if (rc != 0) {
      Result r;
      r.pass = false;
      r.detail =
          arm.algorithm + "/" + arm.variant + " run failed with exit " + std::to_string(rc);
      return r;
    }
    arm.median = median_final_nll_oracle(dir);
  }
  const double dt = now_s() - t0;

  const double rl_delta = arms[1].median - arms[0].median;      // two_segment - baseline
  const double relgan_delta = arms[3].median - arms[2].median;  // two_segment - baseline
  const bool rl_pass = rl_delta <= 0.0;
  const bool relgan_pass = relgan_delta <= 0.0;
  const bool rl_soft = !rl_pass && rl_delta <= 0.05;
  const bool relgan_soft = !relgan_pass && relgan_delta <= 0.05;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "median NLL_oracle: pg %.4f vs %.4f (delta %+.4f), relaxed %.4f vs %.4f "
                "(delta %+.4f), %.0fs (limit 1800s)",
                arms[1].median, arms[0].median, rl_delta, arms[3].median, arms[2].median,
                relgan_delta, dt);

  Result r;
  r.detail = buf;
  if ((rl_pass || rl_soft) && (relgan_pass || relgan_soft) && dt < 1800.0) {
    r.pass = true;
    r.soft = rl_soft || relgan_soft;
    if (r.soft) {
      const fs::path notes = root / "investigation_notes.txt";
      std::ofstream os(notes);
      os << "Directional desk-scale run ended within the 0.05-nat tie band.\n";
      os << "two_segment-vs-baseline deltas: policy-gradient " << rl_delta << ", relaxed "
         << relgan_delta << "\n";
      os << "Per-arm medians: ";
      for (const auto& a : arms)
        os << a.algorithm << "/" << a.variant << "=" << a.median << " ";
      os << "\nPer-seed finals live in the per-arm run directories next to this file.\n";
      os << "Small-scale variance is the expected cause; rerun with more seeds or\n";
      os << "longer adversarial schedules before drawing conclusions.\n";
      r.detail += std::string("; SOFT tie, notes at ") + notes.string();
    }
  } else {
    r.pass = false;
  }
  return r;
}

Result end_to_end_determinism() {
  const fs::path root = fs::path("acceptance_artifacts") / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);

  auto tiny_cfg = [&](const std::string& algorithm, const fs::path& dir, bool wall) {
    TrainConfig cfg;
    cfg.mode = "synthetic";
    cfg.algorithm = algorithm;
    cfg.variant = "two_segment";
    cfg.out_dir = dir.string();
    cfg.seeds = {7};
    cfg.t_max = 6;
    cfg.vocab_cap = 10;
    cfg.oracle_hidden = 8;
    cfg.gen_hidden = 8;
    cfg.disc_emb = 6;
    cfg.disc_filters = 4;
    cfg.disc_filter_sizes = {2};
    cfg.n_train_synthetic = 48;
    cfg.n_test_synthetic = 24;
    cfg.n_eval_samples = 24;
    cfg.batch_size = 8;
    cfg.pretrain_epochs = 2;
    cfg.adv_epochs = 2;
    cfg.g_steps = 1;
    cfg.d_steps = 1;
    cfg.rollout_n = 2;
    cfg.wall_clock = wall;
    return cfg;
  };

  auto csv_files = [](const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
  };
  auto mask_wall = [](std::string text) {
    // Blank the wall_s column (7th) of epoch rows; all other bytes compared.
    std::istringstream is(text);
    std::ostringstream os;
    std::string line;
    bool is_epochs = false;
    bool first = true;
    while (std::getline(is, line)) {
      if (first) {
        is_epochs = line.rfind("epoch,phase,", 0) == 0;
        first = false;
        os << line << "\n";
        continue;
      }
      if (!is_epochs) {
        os << line << "\n";
        continue;
      }
      std::vector<std::string> cells;
      std::string cell;
      std::istringstream ls(line);
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (cells.size() >= 7) cells[6] = "walls";
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << "\n";
    }
    return os.str();
  };

  bool ok = true;
  std::string detail;
  for (const std::string algorithm : {"seqgan", "relgan"}) {
    const fs::path a = root / (algorithm + "_a");
    const fs::path b = root / (algorithm + "_b");
    if (run_experiment(tiny_cfg(algorithm, a, false)) != 0 ||
        run_experiment(tiny_cfg(algorithm, b, false)) != 0) {
      return {false, false, "deterministic-mode rerun failed to execute"};
    }
    const auto fa = csv_files(a);
    const auto fb = csv_files(b);
    if (fa.size() != fb.size() || fa.empty()) ok = false;
    for (std::size_t i = 0; ok && i < fa.size(); ++i) {
      if (fs::relative(fa[i], a) != fs::relative(fb[i], b) || slurp(fa[i]) != slurp(fb[i])) {
        ok = false;
        detail =
            "byte mismatch in " + fs::relative(fa[i], a).string() + " (" + algorithm + ")";
      }
    }
  }

  // Wall-clock runs: every CSV must match byte-for-byte after masking the
  // wall-time column, which is the only physically non-reproducible field.
  if (ok) {
    const fs::path a = root / "wall_a";
    const fs::path b = root / "wall_b";
    if (run_experiment(tiny_cfg("seqgan", a, true)) != 0 ||
        run_experiment(tiny_cfg("seqgan", b, true)) != 0)
      return {false, false, "wall-clock rerun failed to execute"};
    const auto fa = csv_files(a);
    const auto fb = csv_files(b);
    if (fa.size() != fb.size() || fa.empty()) ok = false;
    for (std::size_t i = 0; ok && i < fa.size(); ++i) {
      if (mask_wall(slurp(fa[i])) != mask_wall(slurp(fb[i]))) {
        ok = false;
        detail = "byte mismatch (wall-masked) in " + fs::relative(fa[i], a).string();
      }
    }
  }

  Result r;
  r.pass = ok;
  r.detail = ok ? "all emitted CSVs byte-identical across reruns (both paths)" : detail;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Result()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"reward-oracle-enumeration", reward_oracle_enumeration},
      {"reinforce-gradient", reinforce_gradient},
      {"zero-variance-cells", zero_variance_cells},
      {"masking-invariance", masking_invariance},
      {"relaxed-gradient", relaxed_gradient},
      {"gumbel-max-property", gumbel_max_property},
      {"metric-oracles", metric_oracles},
      {"call-count", call_count},
      {"directional-experiment", directional_experiment},
      {"end-to-end-determinism", end_to_end_determinism},
  };

  std::vector<std::string> selected(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.name) == selected.end())
      continue;
    Result r;
    try {
      r = c.fn();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    const char* tag = r.pass ? (r.soft ? "SOFT" : "PASS") : "FAIL";
    std::printf("[%s] %-26s %s\n", tag, c.name, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
