#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "prefixgan/generator.hpp"
#include "prefixgan/oracle.hpp"

namespace prefixgan {

/// Corpus BLEU convention: every hypothesis is scored against the whole
/// reference set (clipped modified n-gram precision, geometric mean over
/// orders 1..n with zero precisions floored at 1e-9, brevity penalty from the
/// closest reference length, ties broken toward the shorter), then averaged.
inline constexpr const char* kBleuConventionId = "corpus-avg/eps1e-9/closest-bp";
inline constexpr double kBleuEpsilon = 1e-9;

struct BleuReport {
  int max_n = 5;
  std::vector<double> scores;  // scores[n] is BLEU-n for n = 2..max_n
  int n_hypotheses = 0;
  int n_references = 0;
};

/// Reference-side statistics, reusable across many hypotheses.
class BleuScorer {
 public:
  BleuScorer(const std::vector<std::vector<std::string>>& references, int max_n);

  /// Smoothed geometric-mean BLEU-n of one hypothesis vs the reference set.
  double score(const std::vector<std::string>& hypothesis, int n) const;

  int max_n() const { return max_n_; }
  int reference_count() const { return n_refs_; }

 private:
  int max_n_;
  int n_refs_;
  std::vector<std::unordered_map<std::string, int>> max_counts_;  // [order-1]
  std::vector<int> ref_lengths_;                                  // sorted
};

BleuReport bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references, int max_n = 5);

struct MetricRecord {
  double bleu2 = 0.0, bleu3 = 0.0, bleu4 = 0.0, bleu5 = 0.0;
  double nll_gen = 0.0;
  std::optional<double> nll_oracle;
  int n_samples = 0;
  std::string convention_id = kBleuConventionId;
};

/// Tokens of a generated sequence, truncated at the first pad emission.
std::vector<std::string> decode_generated(const Sequence& seq, const Vocab& vocab);

/// Sample n_gen_samples sequences, score BLEU-2..5 against the test corpus,
/// NLL_gen on the test corpus, and NLL_oracle when an oracle is supplied
/// (generator ids are shifted by oracle_id_offset into the oracle's space).
MetricRecord evaluate_checkpoint(const GeneratorModel& gen, const Corpus& test,
                                 const Vocab& vocab, const OracleModel* oracle,
                                 int oracle_id_offset, int n_gen_samples, Rng& rng);

}  // namespace prefixgan
