#include "prefixgan/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prefixgan/checkpoint.hpp"

namespace prefixgan {

std::vector<Mat*> DiscriminatorModel::params() {
  std::vector<Mat*> p{&embed};
  for (auto& m : conv_w) p.push_back(&m);
  for (auto& m : conv_b) p.push_back(&m);
  p.insert(p.end(), {&hw_t_w, &hw_t_b, &hw_h_w, &hw_h_b, &head_w, &head_b});
  return p;
}

std::vector<const Mat*> DiscriminatorModel::params() const {
  std::vector<const Mat*> p{&embed};
  for (const auto& m : conv_w) p.push_back(&m);
  for (const auto& m : conv_b) p.push_back(&m);
  p.insert(p.end(), {&hw_t_w, &hw_t_b, &hw_h_w, &hw_h_b, &head_w, &head_b});
  return p;
}

DiscriminatorModel init_discriminator(std::uint64_t seed, int vocab_size, int t_len,
                                      int emb_dim, int n_filters,
                                      std::vector<int> filter_sizes, int heads, int pad_id,
                                      DiscOutput mode, double init_std) {
  if (vocab_size < 2) throw std::invalid_argument("init_discriminator: vocab too small");
  if (t_len < 1) throw std::invalid_argument("init_discriminator: T must be >= 1");
  if (emb_dim < 1 || n_filters < 1) throw std::invalid_argument("init_discriminator: bad dims");
  if (heads < 1) throw std::invalid_argument("init_discriminator: heads must be >= 1");
  if (pad_id < 0 || pad_id >= vocab_size)
    throw std::invalid_argument("init_discriminator: pad_id out of range");

  std::sort(filter_sizes.begin(), filter_sizes.end());
  filter_sizes.erase(std::unique(filter_sizes.begin(), filter_sizes.end()),
                     filter_sizes.end());
  std::vector<int> usable;
  for (int w : filter_sizes)
    if (w >= 1 && w <= t_len) usable.push_back(w);
  if (usable.empty()) throw std::invalid_argument("init_discriminator: no usable filter size");

  DiscriminatorModel d;
  d.vocab = vocab_size;
  d.t_len = t_len;
  d.emb_dim = emb_dim;
  d.n_filters = n_filters;
  d.heads = heads;
  d.pad_id = pad_id;
  d.output_mode = mode;
  d.filter_sizes = std::move(usable);

  Rng rng(seed);
  auto gauss = [&](Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = init_std * rng.normal();
    return m;
  };
  d.embed = gauss(emb_dim, vocab_size);
  for (int w : d.filter_sizes) {
    d.conv_w.push_back(gauss(n_filters, emb_dim * w));
    d.conv_b.push_back(gauss(n_filters, 1));
  }
  const int ftot = d.feature_dim();
  d.hw_t_w = gauss(ftot, ftot);
  d.hw_t_b = gauss(ftot, 1);
  d.hw_h_w = gauss(ftot, ftot);
  d.hw_h_b = gauss(ftot, 1);
  d.head_w = gauss(heads, ftot);
  d.head_b = gauss(heads, 1);
  return d;
}

namespace {

/// Trunk forward from embedded columns x (emb x T*B, item-major) to raw
/// head logits (S x B). Mirrored exactly by the tape builders below.
Mat trunk_forward(const DiscriminatorModel& d, const Mat& x, int batch) {
  std::vector<Mat> pooled;
  pooled.reserve(d.filter_sizes.size());
  for (std::size_t k = 0; k < d.filter_sizes.size(); ++k) {
    const int w = d.filter_sizes[k];
    const int p = d.t_len - w + 1;
    Mat windows(static_cast<Eigen::Index>(d.emb_dim) * w,
                static_cast<Eigen::Index>(p) * batch);
    for (int b = 0; b < batch; ++b)
      for (int pos = 0; pos < p; ++pos)
        for (int j = 0; j < w; ++j)
          windows.block(static_cast<Eigen::Index>(j) * d.emb_dim,
                        static_cast<Eigen::Index>(b) * p + pos, d.emb_dim, 1) =
              x.col(static_cast<Eigen::Index>(b) * d.t_len + pos + j);
    Mat act = ((d.conv_w[k] * windows).colwise() + Vec(d.conv_b[k].col(0)))
                  .array()
                  .tanh()
                  .matrix();
    Mat mx(d.n_filters, batch);
    for (int b = 0; b < batch; ++b)
      mx.col(b) = act.middleCols(static_cast<Eigen::Index>(b) * p, p).rowwise().maxCoeff();
    pooled.push_back(std::move(mx));
  }
  Mat feat(d.feature_dim(), batch);
  Eigen::Index r = 0;
  for (const Mat& m : pooled) {
    feat.middleRows(r, m.rows()) = m;
    r += m.rows();
  }
  Mat tg = (1.0 / (1.0 +
                   (-((d.hw_t_w * feat).colwise() + Vec(d.hw_t_b.col(0))).array()).exp()))
               .matrix();
  Mat cand = ((d.hw_h_w * feat).colwise() + Vec(d.hw_h_b.col(0))).cwiseMax(0.0);
  Mat hw = tg.cwiseProduct(cand) + (1.0 - tg.array()).matrix().cwiseProduct(feat);
  return (d.head_w * hw).colwise() + Vec(d.head_b.col(0));
}

Mat apply_mode(const DiscriminatorModel& d, Mat logits) {
  if (d.output_mode == DiscOutput::logit) return logits;
  return (1.0 / (1.0 + (-logits.array()).exp())).matrix();
}

void check_cut(const DiscriminatorModel& d, int t) {
  if (t < 1 || t > d.t_len)
    throw std::out_of_range("score: cut t=" + std::to_string(t) + " outside [1, " +
                            std::to_string(d.t_len) + "]");
}

Mat embed_masked_batch(const DiscriminatorModel& d, const std::vector<Sequence>& batch,
                       int t) {
  const int bsz = static_cast<int>(batch.size());
  Mat x(d.emb_dim, static_cast<Eigen::Index>(d.t_len) * bsz);
  for (int b = 0; b < bsz; ++b) {
    if (batch[b].max_len() != d.t_len)
      throw std::invalid_argument("score: sequence length differs from model T");
    for (int pos = 0; pos < d.t_len; ++pos) {
      const int id = pos < t ? batch[b].ids[pos] : d.pad_id;
      if (id < 0 || id >= d.vocab) throw std::out_of_range("score: token id out of range");
      x.col(static_cast<Eigen::Index>(b) * d.t_len + pos) = d.embed.col(id);
    }
  }
  return x;
}

void check_simplex(const Vec& v) {
  if (v.minCoeff() < -1e-12)
    throw std::invalid_argument("score_soft: negative probability component");
  // Tolerance boundary is inclusive so 1e-4 finite-difference probes pass.
  if (std::abs(v.sum() - 1.0) > 1e-4 + 1e-12)
    throw std::invalid_argument("score_soft: step vector off the simplex");
}

}  // namespace

Mat score_batch(const DiscriminatorModel& disc, const std::vector<Sequence>& batch, int t) {
  check_cut(disc, t);
  if (batch.empty()) throw std::invalid_argument("score_batch: empty batch");
  const Mat x = embed_masked_batch(disc, batch, t);
  disc.score_count += static_cast<long>(batch.size());
  return apply_mode(disc, trunk_forward(disc, x, static_cast<int>(batch.size())));
}

PrefixScore score_prefix(const DiscriminatorModel& disc, const Sequence& seq, int t) {
  const Mat s = score_batch(disc, {seq}, t);
  PrefixScore out;
  out.t = t;
  for (int h = 0; h < disc.heads; ++h) out.scores.push_back(s(h, 0));
  return out;
}

PrefixScore score_soft(const DiscriminatorModel& disc, const SoftSequence& soft, int t) {
  check_cut(disc, t);
  if (soft.size() != disc.t_len)
    throw std::invalid_argument("score_soft: sequence length differs from model T");
  Mat x(disc.emb_dim, disc.t_len);
  for (int pos = 0; pos < disc.t_len; ++pos) {
    if (pos < t) {
      if (soft.steps[pos].size() != disc.vocab)
        throw std::invalid_argument("score_soft: step vector has wrong width");
      check_simplex(soft.steps[pos]);
      x.col(pos) = disc.embed * soft.steps[pos];
    } else {
      x.col(pos) = disc.embed.col(disc.pad_id);
    }
  }
  disc.score_count += 1;
  const Mat s = apply_mode(disc, trunk_forward(disc, x, 1));
  PrefixScore out;
  out.t = t;
  for (int h = 0; h < disc.heads; ++h) out.scores.push_back(s(h, 0));
  return out;
}

DiscVars disc_vars(ad::Tape& tape, const DiscriminatorModel& disc, bool trainable) {
  DiscVars v;
  v.embed = tape.leaf(disc.embed, trainable);
  for (std::size_t k = 0; k < disc.conv_w.size(); ++k) {
    v.conv_w.push_back(tape.leaf(disc.conv_w[k], trainable));
    v.conv_b.push_back(tape.leaf(disc.conv_b[k], trainable));
  }
  v.hw_t_w = tape.leaf(disc.hw_t_w, trainable);
  v.hw_t_b = tape.leaf(disc.hw_t_b, trainable);
  v.hw_h_w = tape.leaf(disc.hw_h_w, trainable);
  v.hw_h_b = tape.leaf(disc.hw_h_b, trainable);
  v.head_w = tape.leaf(disc.head_w, trainable);
  v.head_b = tape.leaf(disc.head_b, trainable);
  return v;
}

std::vector<ad::Value> disc_var_list(const DiscVars& v) {
  std::vector<ad::Value> out{v.embed};
  for (auto w : v.conv_w) out.push_back(w);
  for (auto b : v.conv_b) out.push_back(b);
  out.insert(out.end(), {v.hw_t_w, v.hw_t_b, v.hw_h_w, v.hw_h_b, v.head_w, v.head_b});
  return out;
}

namespace {

ad::Value trunk_graph(ad::Tape& t, const DiscVars& v, const DiscriminatorModel& d,
                      ad::Value x) {
  std::vector<ad::Value> pooled;
  for (std::size_t k = 0; k < d.filter_sizes.size(); ++k) {
    const int w = d.filter_sizes[k];
    const int p = d.t_len - w + 1;
    ad::Value windows = t.im2col_time(x, d.t_len, w);
    ad::Value act = t.tanh(t.add_colvec(t.matmul(v.conv_w[k], windows), v.conv_b[k]));
    pooled.push_back(t.max_over_blocks(act, p));
  }
  ad::Value feat = pooled.size() == 1 ? pooled[0] : t.concat_rows(pooled);
  ad::Value tg = t.sigmoid(t.add_colvec(t.matmul(v.hw_t_w, feat), v.hw_t_b));
  ad::Value cand = t.relu(t.add_colvec(t.matmul(v.hw_h_w, feat), v.hw_h_b));
  ad::Value hw = t.add(t.cmul(tg, cand), t.cmul(t.affine(tg, -1.0, 1.0), feat));
  return t.add_colvec(t.matmul(v.head_w, hw), v.head_b);
}

}  // namespace

ad::Value disc_logits_graph(ad::Tape& tape, const DiscVars& vars,
                            const DiscriminatorModel& arch,
                            const std::vector<Sequence>& batch, int t) {
  check_cut(arch, t);
  const int bsz = static_cast<int>(batch.size());
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(bsz) * arch.t_len);
  for (const auto& s : batch) {
    if (s.max_len() != arch.t_len)
      throw std::invalid_argument("disc_logits_graph: sequence length mismatch");
    for (int pos = 0; pos < arch.t_len; ++pos)
      flat.push_back(pos < t ? s.ids[pos] : arch.pad_id);
  }
  ad::Value x = tape.embed_cols(vars.embed, flat);
  arch.score_count += bsz;
  return trunk_graph(tape, vars, arch, x);
}

ad::Value disc_logits_graph_soft(ad::Tape& tape, const DiscVars& vars,
                                 const DiscriminatorModel& arch,
                                 const std::vector<ad::Value>& soft_steps, int batch,
                                 int t) {
  check_cut(arch, t);
  if (static_cast<int>(soft_steps.size()) != arch.t_len)
    throw std::invalid_argument("disc_logits_graph_soft: wrong step count");
  Mat pad_onehot = Mat::Zero(arch.vocab, batch);
  pad_onehot.row(arch.pad_id).setConstant(1.0);
  std::vector<ad::Value> embedded;  // each (emb x batch), time-major
  embedded.reserve(arch.t_len);
  for (int pos = 0; pos < arch.t_len; ++pos) {
    ad::Value step =
        pos < t ? soft_steps[pos] : tape.constant(pad_onehot);
    embedded.push_back(tape.matmul(vars.embed, step));
  }
  // Reorder the (emb x B*T) time-major stack into the item-major layout the
  // convolution windows expect.
  ad::Value stacked = tape.concat_cols(embedded);
  std::vector<int> perm(static_cast<std::size_t>(arch.t_len) * batch);
  for (int b = 0; b < batch; ++b)
    for (int pos = 0; pos < arch.t_len; ++pos)
      perm[static_cast<std::size_t>(b) * arch.t_len + pos] = pos * batch + b;
  ad::Value x = tape.permute_cols(stacked, std::move(perm));
  arch.score_count += batch;
  return trunk_graph(tape, vars, arch, x);
}

std::vector<Vec> score_soft_input_grad(const DiscriminatorModel& disc,
                                       const SoftSequence& soft, int t, int head) {
  check_cut(disc, t);
  if (head < 0 || head >= disc.heads)
    throw std::out_of_range("score_soft_input_grad: head out of range");
  ad::Tape tape;
  DiscVars vars = disc_vars(tape, disc, /*trainable=*/false);
  std::vector<ad::Value> steps;
  steps.reserve(disc.t_len);
  for (int pos = 0; pos < disc.t_len; ++pos) {
    check_simplex(soft.steps[pos]);
    steps.push_back(tape.leaf(soft.steps[pos], true));
  }
  ad::Value logits = disc_logits_graph_soft(tape, vars, disc, steps, 1, t);
  ad::Value score = tape.rows(logits, head, 1);
  if (disc.output_mode == DiscOutput::probability) score = tape.sigmoid(score);
  tape.backward(tape.sum_all(score));
  std::vector<Vec> grads;
  grads.reserve(disc.t_len);
  for (int pos = 0; pos < disc.t_len; ++pos) grads.push_back(tape.grad(steps[pos]).col(0));
  return grads;
}

double disc_update(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                   const std::vector<Sequence>& fake, const DiscLossBuilder& loss_fn,
                   double lr) {
  if (real.empty() || fake.empty()) throw std::invalid_argument("disc_update: empty batch");
  ad::Tape tape;
  DiscVars vars = disc_vars(tape, disc, /*trainable=*/true);
  ad::Value loss = loss_fn(tape, vars, disc, real, fake);
  const double value = tape.val(loss)(0, 0);
  if (!std::isfinite(value))
    throw std::runtime_error("disc_update: loss diverged (NaN/inf)");
  tape.backward(loss);
  std::vector<const Mat*> grads;
  std::vector<Mat> storage;
  storage.reserve(16);
  for (ad::Value v : disc_var_list(vars)) storage.push_back(tape.grad(v));
  for (const Mat& g : storage) grads.push_back(&g);
  ad::adam_step(disc.params(), grads, disc.opt, lr, /*minimize=*/true);
  return value;
}

void DiscriminatorModel::save(const std::filesystem::path& file) const {
  BinWriter w(file);
  write_blob_header(w, BlobKind::discriminator);
  w.i32(vocab);
  w.i32(t_len);
  w.i32(emb_dim);
  w.i32(n_filters);
  w.i32(heads);
  w.i32(pad_id);
  w.i32(output_mode == DiscOutput::probability ? 0 : 1);
  w.i32(static_cast<std::int32_t>(filter_sizes.size()));
  for (int f : filter_sizes) w.i32(f);
  for (const Mat* m : params()) w.mat(*m);
  w.u64(static_cast<std::uint64_t>(opt.step));
  w.u32(static_cast<std::uint32_t>(opt.m.size()));
  for (const Mat& m : opt.m) w.mat(m);
  for (const Mat& m : opt.v) w.mat(m);
  w.close();
}

DiscriminatorModel DiscriminatorModel::load(const std::filesystem::path& file) {
  BinReader r(file);
  if (read_blob_header(r) != BlobKind::discriminator)
    throw std::runtime_error("DiscriminatorModel::load: not a discriminator blob");
  DiscriminatorModel d;
  d.vocab = r.i32();
  d.t_len = r.i32();
  d.emb_dim = r.i32();
  d.n_filters = r.i32();
  d.heads = r.i32();
  d.pad_id = r.i32();
  d.output_mode = r.i32() == 0 ? DiscOutput::probability : DiscOutput::logit;
  const int nf = r.i32();
  d.filter_sizes.resize(nf);
  for (int i = 0; i < nf; ++i) d.filter_sizes[i] = r.i32();
  d.conv_w.resize(nf);
  d.conv_b.resize(nf);
  for (Mat* p : d.params()) *p = r.mat();
  d.opt.step = static_cast<long>(r.u64());
  const std::uint32_t k = r.u32();
  d.opt.m.resize(k);
  d.opt.v.resize(k);
  for (std::uint32_t i = 0; i < k; ++i) d.opt.m[i] = r.mat();
  for (std::uint32_t i = 0; i < k; ++i) d.opt.v[i] = r.mat();
  return d;
}

}  // namespace prefixgan
