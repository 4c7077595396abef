#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace prefixgan::ad {

using Mat = Eigen::MatrixXd;

/// Reverse-mode automatic differentiation over dense double matrices.
///
/// A Tape records one forward pass; nodes are appended in evaluation order and
/// backward() replays them in reverse, accumulating gradients into every node
/// reachable from a differentiable leaf. Build a fresh Tape per training step.
class Tape {
 public:
  struct Value {
    int idx = -1;
    bool valid() const { return idx >= 0; }
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // -- leaves ---------------------------------------------------------------
  Value leaf(Mat v, bool requires_grad);
  Value constant(Mat v) { return leaf(std::move(v), false); }

  // -- linear algebra -------------------------------------------------------
  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  /// a + b broadcast: b is (m x 1), added to every column of a (m x n).
  Value add_colvec(Value a, Value b);
  Value cmul(Value a, Value b);
  /// alpha * a + beta, elementwise.
  Value affine(Value a, double alpha, double beta);
  /// a + c with c a constant matrix (e.g. sampled noise).
  Value add_const(Value a, const Mat& c);

  // -- nonlinearities -------------------------------------------------------
  Value sigmoid(Value a);
  Value tanh(Value a);
  Value relu(Value a);
  Value softplus(Value a);
  Value log(Value a);
  /// Clamp with zero gradient outside (lo, hi).
  Value clamp(Value a, double lo, double hi);
  Value softmax_cols(Value a);
  Value log_softmax_cols(Value a);

  // -- structure ------------------------------------------------------------
  Value rows(Value a, int r0, int n);
  Value concat_rows(const std::vector<Value>& parts);
  Value concat_cols(const std::vector<Value>& parts);
  /// out.col(j) = a.col(perm[j]).
  Value permute_cols(Value a, std::vector<int> perm);
  /// Embedding lookup: table (m x V), ids of size B -> (m x B).
  Value embed_cols(Value table, std::vector<int> ids);
  /// Sliding windows over per-item time blocks. x is (m x T*B), item-major
  /// (columns [b*T, b*T+T) hold item b). Result is (m*w x P*B) with
  /// P = T - w + 1 window positions per item.
  Value im2col_time(Value x, int t_len, int window);
  /// Row-wise max over consecutive column blocks: x (m x P*B) -> (m x B).
  Value max_over_blocks(Value x, int block);

  // -- reductions -----------------------------------------------------------
  Value sum_all(Value a);
  Value mean_all(Value a);
  /// Weighted negative log-likelihood pick: logp is (V x B) of log-probs;
  /// returns sum_b w[b] * (-logp(ids[b], b)) as a scalar node.
  Value weighted_nll(Value logp, std::vector<int> ids, std::vector<double> w);

  // -- access ---------------------------------------------------------------
  const Mat& val(Value v) const { return nodes_[v.idx].val; }
  const Mat& grad(Value v) const { return nodes_[v.idx].grad; }
  bool requires_grad(Value v) const { return nodes_[v.idx].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Backpropagate from a scalar (1x1) node.
  void backward(Value root);

 private:
  struct Node {
    Mat val;
    Mat grad;
    bool requires_grad = false;
    std::function<void(Tape&)> back;
  };

  Value push(Mat v, bool requires_grad, std::function<void(Tape&)> back);
  Mat& grad_ref(int idx) { return nodes_[idx].grad; }
  bool needs(Value v) const { return nodes_[v.idx].requires_grad; }

  std::vector<Node> nodes_;
};

using Value = Tape::Value;

/// Adam optimizer state for a fixed, ordered list of parameter tensors.
struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update. params[i] is updated in place from grads[i]; `minimize`
/// selects descent (true) or ascent (false).
void adam_step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
               AdamState& state, double lr, bool minimize = true);

}  // namespace prefixgan::ad
