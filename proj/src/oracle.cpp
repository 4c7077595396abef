#include "prefixgan/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "prefixgan/checkpoint.hpp"

namespace prefixgan {

OracleModel init_oracle(std::uint64_t seed, int vocab_size, int hidden_width) {
  if (vocab_size < 2) throw std::invalid_argument("init_oracle: vocab_size must be >= 2");
  if (hidden_width < 1) throw std::invalid_argument("init_oracle: hidden_width must be >= 1");
  OracleModel m;
  m.seed = seed;
  Rng rng(seed);
  m.lm.init(vocab_size, hidden_width, rng, 1.0);
  return m;
}

Corpus oracle_sample(const OracleModel& oracle, int n, int t_len, Rng& rng) {
  if (n < 1) throw std::invalid_argument("oracle_sample: n must be >= 1");
  if (t_len < 1) throw std::invalid_argument("oracle_sample: T must be >= 1");
  const auto toks = ancestral_sample(oracle.lm, kOracleStartId,
                                     std::vector<std::vector<int>>(n), t_len, rng);
  Corpus c;
  c.T = t_len;
  c.sequences.reserve(n);
  for (const auto& t : toks) {
    Sequence s;
    s.ids = t;
    s.true_len = t_len;
    c.sequences.push_back(std::move(s));
  }
  // Fixed-length data: the average length coincides with T, so the segment
  // point falls back to the midpoint (T >= 2).
  c.t_ave = (t_len >= 2) ? t_len / 2 : 1;
  return c;
}

NllEstimate nll_oracle_of(const OracleModel& oracle, const std::vector<Sequence>& seqs) {
  const auto nlls = sequence_nlls(oracle.lm, kOracleStartId, seqs, kProbClamp);
  NllEstimate e;
  e.n = static_cast<int>(nlls.size());
  if (e.n == 0) return e;
  double sum = 0.0;
  for (double v : nlls) sum += v;
  e.mean = sum / e.n;
  if (e.n > 1) {
    double ss = 0.0;
    for (double v : nlls) ss += (v - e.mean) * (v - e.mean);
    e.std_err = std::sqrt(ss / (e.n - 1)) / std::sqrt(static_cast<double>(e.n));
  }
  return e;
}

NllEstimate nll_oracle(const OracleModel& oracle, const SamplerFn& sampler, int n_samples,
                       int t_len, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("nll_oracle: n_samples must be >= 1");
  const auto seqs = sampler(n_samples, t_len, rng);
  for (const auto& s : seqs)
    if (s.true_len != t_len)
      throw std::invalid_argument("nll_oracle: sampler emitted a sequence of wrong length");
  return nll_oracle_of(oracle, seqs);
}

void OracleModel::save(const std::filesystem::path& file) const {
  BinWriter w(file);
  write_blob_header(w, BlobKind::oracle);
  w.u64(seed);
  w.i32(lm.vocab);
  w.i32(lm.hidden);
  for (const Mat* m : lm.params()) w.mat(*m);
  w.close();
}

OracleModel OracleModel::load(const std::filesystem::path& file) {
  BinReader r(file);
  if (read_blob_header(r) != BlobKind::oracle)
    throw std::runtime_error("OracleModel::load: not an oracle blob");
  OracleModel m;
  m.seed = r.u64();
  m.lm.vocab = r.i32();
  m.lm.hidden = r.i32();
  for (Mat* p : m.lm.params()) *p = r.mat();
  return m;
}

}  // namespace prefixgan
