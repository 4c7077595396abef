#include "prefixgan/lstm.hpp"

#include <cstring>
#include <stdexcept>

namespace prefixgan {

void LstmLm::init(int vocab_size, int hidden_width, Rng& rng, double stddev) {
  if (vocab_size < 2) throw std::invalid_argument("LstmLm: vocab size must be >= 2");
  if (hidden_width < 1) throw std::invalid_argument("LstmLm: hidden width must be >= 1");
  vocab = vocab_size;
  hidden = hidden_width;
  auto gauss = [&](Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = stddev * rng.normal();
    return m;
  };
  embed = gauss(hidden, vocab);
  w = gauss(4 * hidden, 2 * hidden);
  b = gauss(4 * hidden, 1);
  proj = gauss(vocab, hidden);
  bias = gauss(vocab, 1);
}

std::vector<Mat*> LstmLm::params() { return {&embed, &w, &b, &proj, &bias}; }

std::vector<const Mat*> LstmLm::params() const { return {&embed, &w, &b, &proj, &bias}; }

LstmLm::State LstmLm::initial_state(int batch) const {
  return State{Mat::Zero(hidden, batch), Mat::Zero(hidden, batch)};
}

namespace {

void lstm_advance(const LstmLm& lm, const Mat& x, LstmLm::State& st) {
  const int h = lm.hidden;
  Mat xh(2 * h, x.cols());
  xh.topRows(h) = x;
  xh.bottomRows(h) = st.h;
  Mat z = (lm.w * xh).colwise() + Vec(lm.b.col(0));
  Mat ig = (1.0 / (1.0 + (-z.topRows(h).array()).exp())).matrix();
  Mat fg = (1.0 / (1.0 + (-z.middleRows(h, h).array()).exp())).matrix();
  Mat gg = z.middleRows(2 * h, h).array().tanh().matrix();
  Mat og = (1.0 / (1.0 + (-z.bottomRows(h).array()).exp())).matrix();
  st.c = fg.cwiseProduct(st.c) + ig.cwiseProduct(gg);
  st.h = og.cwiseProduct(st.c.array().tanh().matrix());
}

}  // namespace

void LstmLm::step_ids(const std::vector<int>& ids, State& state) const {
  Mat x(hidden, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const int id = (ids[j] >= 0 && ids[j] < vocab) ? ids[j] : 0;
    x.col(j) = embed.col(id);
  }
  lstm_advance(*this, x, state);
}

void LstmLm::step_soft(const Mat& soft, State& state) const {
  if (soft.rows() != vocab) throw std::invalid_argument("step_soft: bad input rows");
  Mat x = embed * soft;
  lstm_advance(*this, x, state);
}

Mat LstmLm::logits(const State& state) const {
  return (proj * state.h).colwise() + Vec(bias.col(0));
}

Vec step_distribution(const LstmLm& lm, int start_id, const std::vector<int>& prefix) {
  LstmLm::State st = lm.initial_state(1);
  lm.step_ids({start_id}, st);
  for (int id : prefix) lm.step_ids({id}, st);
  return lm.probs(st).col(0);
}

std::vector<std::vector<int>> ancestral_sample(const LstmLm& lm, int start_id,
                                               const std::vector<std::vector<int>>& prefixes,
                                               int target_len, Rng& rng) {
  const int batch = static_cast<int>(prefixes.size());
  if (batch < 1) throw std::invalid_argument("ancestral_sample: empty batch");
  const int plen = static_cast<int>(prefixes[0].size());
  for (const auto& p : prefixes)
    if (static_cast<int>(p.size()) != plen)
      throw std::invalid_argument("ancestral_sample: prefixes must share length");
  if (plen >= target_len)
    throw std::invalid_argument("ancestral_sample: target length must exceed prefix");

  std::vector<std::vector<int>> out(prefixes);
  for (auto& o : out) o.reserve(target_len);

  LstmLm::State st = lm.initial_state(batch);
  lm.step_ids(std::vector<int>(batch, start_id), st);
  std::vector<int> cur(batch);
  for (int k = 0; k < plen; ++k) {
    for (int j = 0; j < batch; ++j) cur[j] = prefixes[j][k];
    lm.step_ids(cur, st);
  }
  // After consuming [start, prefix] the state predicts token plen.
  for (int t = plen; t < target_len; ++t) {
    const Mat p = lm.probs(st);
    for (int j = 0; j < batch; ++j) {
      const int tok = rng.categorical(p.col(j), lm.vocab);
      out[j].push_back(tok);
      cur[j] = tok;
    }
    if (t + 1 < target_len) lm.step_ids(cur, st);
  }
  return out;
}

std::vector<double> sequence_nlls(const LstmLm& lm, int start_id,
                                  const std::vector<Sequence>& seqs, double clamp_eps) {
  const int batch = static_cast<int>(seqs.size());
  if (batch < 1) return {};
  int t_max = 0;
  for (const auto& s : seqs) t_max = std::max(t_max, s.true_len);
  std::vector<double> nll(batch, 0.0);
  LstmLm::State st = lm.initial_state(batch);
  lm.step_ids(std::vector<int>(batch, start_id), st);
  std::vector<int> cur(batch);
  for (int t = 0; t < t_max; ++t) {
    const Mat p = lm.probs(st);
    for (int j = 0; j < batch; ++j) {
      if (t >= seqs[j].true_len) continue;
      const int id = seqs[j].ids[t];
      const double prob =
          (id >= 0 && id < lm.vocab) ? std::max(p(id, j), clamp_eps) : clamp_eps;
      nll[j] -= std::log(prob);
    }
    if (t + 1 < t_max) {
      for (int j = 0; j < batch; ++j)
        cur[j] = (t < seqs[j].true_len) ? seqs[j].ids[t] : 0;
      lm.step_ids(cur, st);
    }
  }
  return nll;
}

std::uint64_t param_checksum(const LstmLm& lm) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const Mat& m) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t n = sizeof(double) * static_cast<std::size_t>(m.size());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const Mat* m : lm.params()) mix(*m);
  return h;
}

}  // namespace prefixgan
