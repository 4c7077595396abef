#pragma once

#include "prefixgan/ad.hpp"
#include "prefixgan/corpus.hpp"
#include "prefixgan/numeric.hpp"
#include "prefixgan/rng.hpp"

namespace prefixgan {

enum class DiscOutput { probability, logit };

/// Relaxed sequence: one probability vector over the vocabulary per step,
/// together with the temperature that produced it.
struct SoftSequence {
  std::vector<Vec> steps;
  double tau = 1.0;

  int size() const { return static_cast<int>(steps.size()); }
};

/// Real/fake scorer over the padded length-T grid: token embedding, n-gram
/// convolutions with max-over-time pooling, a highway layer, and S scoring
/// heads sharing the feature trunk. One parameter set serves every prefix
/// length; positions past the cut are replaced by the pad token before
/// embedding, which makes prefix scores exactly independent of the suffix.
struct DiscriminatorModel {
  int vocab = 0;
  int t_len = 0;
  int emb_dim = 0;
  int n_filters = 0;
  int heads = 1;
  int pad_id = 0;
  DiscOutput output_mode = DiscOutput::probability;
  std::vector<int> filter_sizes;

  Mat embed;                // emb x vocab
  std::vector<Mat> conv_w;  // per width: (F x emb*w)
  std::vector<Mat> conv_b;  // per width: (F x 1)
  Mat hw_t_w, hw_t_b;       // highway transform gate
  Mat hw_h_w, hw_h_b;       // highway candidate
  Mat head_w, head_b;       // (S x Ftot), (S x 1)

  ad::AdamState opt;
  // Number of per-sequence scoring evaluations; not synchronized.
  mutable long score_count = 0;

  int feature_dim() const { return n_filters * static_cast<int>(filter_sizes.size()); }
  std::vector<Mat*> params();
  std::vector<const Mat*> params() const;

  void save(const std::filesystem::path& file) const;
  static DiscriminatorModel load(const std::filesystem::path& file);
};

DiscriminatorModel init_discriminator(std::uint64_t seed, int vocab_size, int t_len,
                                      int emb_dim, int n_filters,
                                      std::vector<int> filter_sizes, int heads, int pad_id,
                                      DiscOutput mode, double init_std = 0.1);

struct PrefixScore {
  int t = 0;
  std::vector<double> scores;  // one per head, in the model's output mode
};

/// Score the first t tokens; positions >= t are pad-masked first.
PrefixScore score_prefix(const DiscriminatorModel& disc, const Sequence& seq, int t);

/// Relaxed-input scoring: the embedding lookup becomes a probability-weighted
/// mix. Steps >= t are replaced by the one-hot pad vector. One-hot input
/// reproduces score_prefix exactly. Errors when a step leaves the simplex by
/// more than 1e-4.
PrefixScore score_soft(const DiscriminatorModel& disc, const SoftSequence& soft, int t);

/// Batched scoring at a shared cut; returns (heads x batch) in output mode.
Mat score_batch(const DiscriminatorModel& disc, const std::vector<Sequence>& batch, int t);

/// Gradient of head `head`'s score at cut t with respect to every soft input
/// step (zero past the cut).
std::vector<Vec> score_soft_input_grad(const DiscriminatorModel& disc,
                                       const SoftSequence& soft, int t, int head);

// ---- autodiff graph surface ------------------------------------------------

struct DiscVars {
  ad::Value embed;
  std::vector<ad::Value> conv_w, conv_b;
  ad::Value hw_t_w, hw_t_b, hw_h_w, hw_h_b;
  ad::Value head_w, head_b;
};

/// Register discriminator parameters on a tape; trainable=false freezes them
/// (gradients flow through activations only, e.g. for generator updates).
DiscVars disc_vars(ad::Tape& tape, const DiscriminatorModel& disc, bool trainable);

std::vector<ad::Value> disc_var_list(const DiscVars& v);

/// Raw logits (heads x batch) for a discrete batch cut at t.
ad::Value disc_logits_graph(ad::Tape& tape, const DiscVars& vars,
                            const DiscriminatorModel& arch,
                            const std::vector<Sequence>& batch, int t);

/// Raw logits for a relaxed batch. soft_steps has t_len entries, each a
/// (vocab x batch) node; steps >= t are replaced by constant pad one-hots.
ad::Value disc_logits_graph_soft(ad::Tape& tape, const DiscVars& vars,
                                 const DiscriminatorModel& arch,
                                 const std::vector<ad::Value>& soft_steps, int batch,
                                 int t);

using DiscLossBuilder =
    std::function<ad::Value(ad::Tape&, const DiscVars&, DiscriminatorModel&,
                            const std::vector<Sequence>& real,
                            const std::vector<Sequence>& fake)>;

/// One Adam step on the supplied loss; returns the loss value. Throws on NaN.
double disc_update(DiscriminatorModel& disc, const std::vector<Sequence>& real,
                   const std::vector<Sequence>& fake, const DiscLossBuilder& loss_fn,
                   double lr);

}  // namespace prefixgan
