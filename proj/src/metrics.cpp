#include "prefixgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace prefixgan {

namespace {

std::string ngram_key(const std::vector<std::string>& toks, std::size_t start, int n) {
  std::string key = toks[start];
  for (int k = 1; k < n; ++k) {
    key.push_back('\x1f');
    key += toks[start + k];
  }
  return key;
}

std::unordered_map<std::string, int> count_ngrams(const std::vector<std::string>& toks,
                                                  int n) {
  std::unordered_map<std::string, int> counts;
  if (static_cast<int>(toks.size()) >= n)
    for (std::size_t i = 0; i + n <= toks.size(); ++i) ++counts[ngram_key(toks, i, n)];
  return counts;
}

}  // namespace

BleuScorer::BleuScorer(const std::vector<std::vector<std::string>>& references, int max_n)
    : max_n_(max_n), n_refs_(static_cast<int>(references.size())) {
  if (max_n < 1) throw std::invalid_argument("BleuScorer: max_n must be >= 1");
  if (references.empty()) throw std::invalid_argument("BleuScorer: empty reference set");
  max_counts_.resize(max_n);
  for (const auto& ref : references) {
    ref_lengths_.push_back(static_cast<int>(ref.size()));
    for (int n = 1; n <= max_n; ++n) {
      for (const auto& [key, cnt] : count_ngrams(ref, n)) {
        int& mx = max_counts_[n - 1][key];
        mx = std::max(mx, cnt);
      }
    }
  }
  std::sort(ref_lengths_.begin(), ref_lengths_.end());
}

double BleuScorer::score(const std::vector<std::string>& hyp, int n) const {
  if (n < 1 || n > max_n_) throw std::invalid_argument("BleuScorer: order out of range");
  if (hyp.empty()) return 0.0;
  const int c = static_cast<int>(hyp.size());

  double log_geo = 0.0;
  for (int k = 1; k <= n; ++k) {
    const auto hyp_counts = count_ngrams(hyp, k);
    long clipped = 0;
    long total = 0;
    for (const auto& [key, cnt] : hyp_counts) {
      total += cnt;
      auto it = max_counts_[k - 1].find(key);
      if (it != max_counts_[k - 1].end()) clipped += std::min(cnt, it->second);
    }
    const double prec = total > 0 ? static_cast<double>(clipped) / total : 0.0;
    log_geo += std::log(prec > 0.0 ? prec : kBleuEpsilon);
  }
  log_geo /= n;

  // Closest reference length; ties go to the shorter reference.
  int best_r;
  const auto it = std::lower_bound(ref_lengths_.begin(), ref_lengths_.end(), c);
  if (it == ref_lengths_.begin()) {
    best_r = *it;
  } else if (it == ref_lengths_.end()) {
    best_r = ref_lengths_.back();
  } else {
    const int above = *it;
    const int below = *(it - 1);
    best_r = (c - below <= above - c) ? below : above;
  }
  const double bp = c >= best_r ? 1.0 : std::exp(1.0 - static_cast<double>(best_r) / c);
  return bp * std::exp(log_geo);
}

BleuReport bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references, int max_n) {
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty hypothesis set");
  BleuScorer scorer(references, max_n);
  BleuReport rep;
  rep.max_n = max_n;
  rep.n_hypotheses = static_cast<int>(hypotheses.size());
  rep.n_references = static_cast<int>(references.size());
  rep.scores.assign(max_n + 1, 0.0);
  bool warned = false;
  for (int n = 2; n <= max_n; ++n) {
    double acc = 0.0;
    for (const auto& hyp : hypotheses) {
      if (hyp.empty() && !warned) {
        std::cerr << "bleu: empty hypothesis scored 0\n";
        warned = true;
      }
      acc += scorer.score(hyp, n);
    }
    rep.scores[n] = acc / hypotheses.size();
  }
  return rep;
}

std::vector<std::string> decode_generated(const Sequence& seq, const Vocab& vocab) {
  std::vector<std::string> toks;
  for (int k = 0; k < seq.true_len; ++k) {
    if (seq.ids[k] == vocab.pad_id) break;
    toks.push_back(vocab.token_of(seq.ids[k]));
  }
  return toks;
}

MetricRecord evaluate_checkpoint(const GeneratorModel& gen, const Corpus& test,
                                 const Vocab& vocab, const OracleModel* oracle,
                                 int oracle_id_offset, int n_gen_samples, Rng& rng) {
  if (test.sequences.empty()) throw std::invalid_argument("evaluate_checkpoint: empty test set");
  const auto samples = sample(gen, n_gen_samples, test.T, rng);

  std::vector<std::vector<std::string>> hyps;
  hyps.reserve(samples.size());
  for (const auto& s : samples) hyps.push_back(decode_generated(s, vocab));
  std::vector<std::vector<std::string>> refs;
  refs.reserve(test.sequences.size());
  for (const auto& s : test.sequences) refs.push_back(decode(s, vocab));

  const BleuReport rep = bleu(hyps, refs, 5);
  MetricRecord rec;
  rec.bleu2 = rep.scores[2];
  rec.bleu3 = rep.scores[3];
  rec.bleu4 = rep.scores[4];
  rec.bleu5 = rep.scores[5];
  rec.nll_gen = nll_gen(gen, test);
  rec.n_samples = n_gen_samples;
  if (oracle != nullptr) {
    std::vector<Sequence> mapped = samples;
    for (auto& s : mapped)
      for (int& id : s.ids) id -= oracle_id_offset;  // specials fall below 0 and clamp
    rec.nll_oracle = nll_oracle_of(*oracle, mapped).mean;
  }
  return rec;
}

}  // namespace prefixgan
