#include "prefixgan/generator.hpp"

#include <cmath>
#include <stdexcept>

#include "prefixgan/checkpoint.hpp"

namespace prefixgan {

GeneratorModel init_generator(std::uint64_t seed, int vocab_size, int hidden_width,
                              int start_id, double init_std) {
  if (start_id < 0 || start_id >= vocab_size)
    throw std::invalid_argument("init_generator: start_id out of range");
  GeneratorModel g;
  g.start_id = start_id;
  Rng rng(seed);
  g.lm.init(vocab_size, hidden_width, rng, init_std);
  return g;
}

Vec step_distribution(const GeneratorModel& gen, const std::vector<int>& prefix) {
  return step_distribution(gen.lm, gen.start_id, prefix);
}

std::vector<Sequence> sample(const GeneratorModel& gen, int n, int t_len, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const auto toks =
      ancestral_sample(gen.lm, gen.start_id, std::vector<std::vector<int>>(n), t_len, rng);
  std::vector<Sequence> out;
  out.reserve(n);
  for (const auto& t : toks) {
    Sequence s;
    s.ids = t;
    s.true_len = t_len;
    out.push_back(std::move(s));
  }
  return out;
}

std::pair<std::vector<Sequence>, std::vector<double>> sample_with_logprob(
    const GeneratorModel& gen, int n, int t_len, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_with_logprob: n must be >= 1");
  std::vector<Sequence> seqs(n);
  for (auto& s : seqs) {
    s.ids.reserve(t_len);
    s.true_len = t_len;
  }
  std::vector<double> logp(n, 0.0);
  LstmLm::State st = gen.lm.initial_state(n);
  gen.lm.step_ids(std::vector<int>(n, gen.start_id), st);
  std::vector<int> cur(n);
  for (int t = 0; t < t_len; ++t) {
    const Mat p = gen.lm.probs(st);
    for (int j = 0; j < n; ++j) {
      const int tok = rng.categorical(p.col(j), gen.lm.vocab);
      seqs[j].ids.push_back(tok);
      logp[j] += std::log(std::max(p(tok, j), kProbClamp));
      cur[j] = tok;
    }
    if (t + 1 < t_len) gen.lm.step_ids(cur, st);
  }
  return {std::move(seqs), std::move(logp)};
}

double nll_gen(const GeneratorModel& gen, const Corpus& corpus) {
  if (corpus.sequences.empty()) throw std::invalid_argument("nll_gen: empty corpus");
  const auto nlls = sequence_nlls(gen.lm, gen.start_id, corpus.sequences, kProbClamp);
  double sum = 0.0;
  for (double v : nlls) sum += v;
  return sum / static_cast<double>(nlls.size());
}

GenVars gen_vars(ad::Tape& tape, const GeneratorModel& gen) {
  GenVars v;
  v.embed = tape.leaf(gen.lm.embed, true);
  v.w = tape.leaf(gen.lm.w, true);
  v.b = tape.leaf(gen.lm.b, true);
  v.proj = tape.leaf(gen.lm.proj, true);
  v.bias = tape.leaf(gen.lm.bias, true);
  return v;
}

std::vector<ad::Value> gen_var_list(const GenVars& v) {
  return {v.embed, v.w, v.b, v.proj, v.bias};
}

namespace {

struct GraphState {
  ad::Value h, c;
};

/// One LSTM step on the tape; x is (hidden x B).
GraphState lstm_step_graph(ad::Tape& t, const GenVars& v, int hidden, ad::Value x,
                           const GraphState& st) {
  ad::Value xh = t.concat_rows({x, st.h});
  ad::Value z = t.add_colvec(t.matmul(v.w, xh), v.b);
  ad::Value ig = t.sigmoid(t.rows(z, 0, hidden));
  ad::Value fg = t.sigmoid(t.rows(z, hidden, hidden));
  ad::Value gg = t.tanh(t.rows(z, 2 * hidden, hidden));
  ad::Value og = t.sigmoid(t.rows(z, 3 * hidden, hidden));
  GraphState out;
  out.c = t.add(t.cmul(fg, st.c), t.cmul(ig, gg));
  out.h = t.cmul(og, t.tanh(out.c));
  return out;
}

ad::Value logits_graph(ad::Tape& t, const GenVars& v, const GraphState& st) {
  return t.add_colvec(t.matmul(v.proj, st.h), v.bias);
}

}  // namespace

ad::Value gen_weighted_nll_graph(ad::Tape& tape, const GenVars& vars, const LstmLm& arch,
                                 int start_id, const std::vector<Sequence>& batch,
                                 const Mat& weights) {
  const int bsz = static_cast<int>(batch.size());
  if (bsz < 1) throw std::invalid_argument("gen_weighted_nll_graph: empty batch");
  const int t_len = batch[0].max_len();
  if (weights.rows() != bsz || weights.cols() != t_len)
    throw std::invalid_argument("gen_weighted_nll_graph: weights shape mismatch");

  GraphState st{tape.constant(Mat::Zero(arch.hidden, bsz)),
                tape.constant(Mat::Zero(arch.hidden, bsz))};
  std::vector<int> cur(bsz, start_id);
  ad::Value total;
  for (int t = 0; t < t_len; ++t) {
    ad::Value x = tape.embed_cols(vars.embed, cur);
    st = lstm_step_graph(tape, vars, arch.hidden, x, st);
    ad::Value logp = tape.log_softmax_cols(logits_graph(tape, vars, st));
    std::vector<int> ids(bsz);
    std::vector<double> w(bsz);
    for (int j = 0; j < bsz; ++j) {
      const bool live = t < batch[j].true_len;
      ids[j] = live ? batch[j].ids[t] : 0;
      w[j] = live ? weights(j, t) : 0.0;
    }
    ad::Value term = tape.weighted_nll(logp, ids, w);
    total = total.valid() ? tape.add(total, term) : term;
    for (int j = 0; j < bsz; ++j) cur[j] = (t < batch[j].true_len) ? batch[j].ids[t] : 0;
  }
  return total;
}

std::pair<double, std::vector<Mat>> gen_weighted_nll_grad(const GeneratorModel& gen,
                                                          const std::vector<Sequence>& batch,
                                                          const Mat& weights) {
  ad::Tape tape;
  GenVars vars = gen_vars(tape, gen);
  ad::Value loss = gen_weighted_nll_graph(tape, vars, gen.lm, gen.start_id, batch, weights);
  tape.backward(loss);
  std::vector<Mat> grads;
  for (ad::Value v : gen_var_list(vars)) grads.push_back(tape.grad(v));
  return {tape.val(loss)(0, 0), std::move(grads)};
}

MlePretrainResult mle_pretrain(GeneratorModel& gen, const Corpus& corpus, int epochs,
                               double lr, Rng& rng, int batch_size) {
  if (corpus.sequences.empty()) throw std::invalid_argument("mle_pretrain: empty corpus");
  if (batch_size < 1) throw std::invalid_argument("mle_pretrain: batch_size must be >= 1");
  MlePretrainResult res;
  const int n = static_cast<int>(corpus.sequences.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int e = 0; e < epochs; ++e) {
    // Fisher-Yates shuffle driven by the run rng.
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
    double tok_loss_sum = 0.0;
    long tok_count = 0;
    for (int off = 0; off < n; off += batch_size) {
      const int bsz = std::min(batch_size, n - off);
      std::vector<Sequence> batch;
      batch.reserve(bsz);
      long batch_tokens = 0;
      for (int k = 0; k < bsz; ++k) {
        batch.push_back(corpus.sequences[order[off + k]]);
        batch_tokens += batch.back().true_len;
      }
      Mat weights = Mat::Zero(bsz, corpus.T);
      for (int j = 0; j < bsz; ++j)
        for (int t = 0; t < batch[j].true_len; ++t)
          weights(j, t) = 1.0 / static_cast<double>(batch_tokens);
      auto [loss, grads] = gen_weighted_nll_grad(gen, batch, weights);
      if (!std::isfinite(loss))
        throw std::runtime_error("mle_pretrain: loss diverged (NaN/inf) at epoch " +
                                 std::to_string(e));
      std::vector<const Mat*> gptrs;
      for (const Mat& g : grads) gptrs.push_back(&g);
      ad::adam_step(gen.lm.params(), gptrs, gen.opt, lr, /*minimize=*/true);
      tok_loss_sum += loss * static_cast<double>(batch_tokens);
      tok_count += batch_tokens;
    }
    res.loss_curve.push_back(tok_loss_sum / static_cast<double>(tok_count));
  }
  return res;
}

void GeneratorModel::save(const std::filesystem::path& file) const {
  BinWriter w(file);
  write_blob_header(w, BlobKind::generator);
  w.i32(lm.vocab);
  w.i32(lm.hidden);
  w.i32(start_id);
  for (const Mat* m : lm.params()) w.mat(*m);
  // Optimizer state travels with the model so training can resume bit-exactly.
  w.u64(static_cast<std::uint64_t>(opt.step));
  w.u32(static_cast<std::uint32_t>(opt.m.size()));
  for (const Mat& m : opt.m) w.mat(m);
  for (const Mat& m : opt.v) w.mat(m);
  w.close();
}

GeneratorModel GeneratorModel::load(const std::filesystem::path& file) {
  BinReader r(file);
  if (read_blob_header(r) != BlobKind::generator)
    throw std::runtime_error("GeneratorModel::load: not a generator blob");
  GeneratorModel g;
  g.lm.vocab = r.i32();
  g.lm.hidden = r.i32();
  g.start_id = r.i32();
  for (Mat* p : g.lm.params()) *p = r.mat();
  g.opt.step = static_cast<long>(r.u64());
  const std::uint32_t k = r.u32();
  g.opt.m.resize(k);
  g.opt.v.resize(k);
  for (std::uint32_t i = 0; i < k; ++i) g.opt.m[i] = r.mat();
  for (std::uint32_t i = 0; i < k; ++i) g.opt.v[i] = r.mat();
  return g;
}

}  // namespace prefixgan
