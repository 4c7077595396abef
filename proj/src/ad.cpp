#include "prefixgan/ad.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace prefixgan::ad {

namespace {

Mat softmax_columns(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mx = x.col(j).maxCoeff();
    Eigen::VectorXd e = (x.col(j).array() - mx).exp();
    y.col(j) = e / e.sum();
  }
  return y;
}

Mat log_softmax_columns(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mx = x.col(j).maxCoeff();
    const double lse = std::log((x.col(j).array() - mx).exp().sum()) + mx;
    y.col(j) = x.col(j).array() - lse;
  }
  return y;
}

double softplus_scalar(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

Value Tape::push(Mat v, bool requires_grad, std::function<void(Tape&)> back) {
  Node n;
  n.val = std::move(v);
  n.requires_grad = requires_grad;
  n.back = requires_grad ? std::move(back) : nullptr;
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

Value Tape::leaf(Mat v, bool requires_grad) {
  return push(std::move(v), requires_grad, nullptr);
}

Value Tape::matmul(Value a, Value b) {
  Mat out = nodes_[a.idx].val * nodes_[b.idx].val;
  const bool rg = needs(a) || needs(b);
  const int ai = a.idx, bi = b.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, bi, oi](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      if (t.nodes_[ai].requires_grad)
        t.nodes_[ai].grad.noalias() += g * t.nodes_[bi].val.transpose();
      if (t.nodes_[bi].requires_grad)
        t.nodes_[bi].grad.noalias() += t.nodes_[ai].val.transpose() * g;
    };
  }
  return o;
}

Value Tape::add(Value a, Value b) {
  Mat out = nodes_[a.idx].val + nodes_[b.idx].val;
  const bool rg = needs(a) || needs(b);
  const int ai = a.idx, bi = b.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, bi, oi](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      if (t.nodes_[ai].requires_grad) t.nodes_[ai].grad += g;
      if (t.nodes_[bi].requires_grad) t.nodes_[bi].grad += g;
    };
  }
  return o;
}

Value Tape::sub(Value a, Value b) {
  Mat out = nodes_[a.idx].val - nodes_[b.idx].val;
  const bool rg = needs(a) || needs(b);
  const int ai = a.idx, bi = b.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, bi, oi](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      if (t.nodes_[ai].requires_grad) t.nodes_[ai].grad += g;
      if (t.nodes_[bi].requires_grad) t.nodes_[bi].grad -= g;
    };
  }
  return o;
}

Value Tape::add_colvec(Value a, Value b) {
  const Mat& av = nodes_[a.idx].val;
  const Mat& bv = nodes_[b.idx].val;
  if (bv.cols() != 1 || bv.rows() != av.rows())
    throw std::invalid_argument("add_colvec: b must be (rows(a) x 1)");
  Mat out = av.colwise() + Eigen::VectorXd(bv.col(0));
  const bool rg = needs(a) || needs(b);
  const int ai = a.idx, bi = b.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, bi, oi](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      if (t.nodes_[ai].requires_grad) t.nodes_[ai].grad += g;
      if (t.nodes_[bi].requires_grad) t.nodes_[bi].grad += g.rowwise().sum();
    };
  }
  return o;
}

Value Tape::cmul(Value a, Value b) {
  Mat out = nodes_[a.idx].val.cwiseProduct(nodes_[b.idx].val);
  const bool rg = needs(a) || needs(b);
  const int ai = a.idx, bi = b.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, bi, oi](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      if (t.nodes_[ai].requires_grad)
        t.nodes_[ai].grad += g.cwiseProduct(t.nodes_[bi].val);
      if (t.nodes_[bi].requires_grad)
        t.nodes_[bi].grad += g.cwiseProduct(t.nodes_[ai].val);
    };
  }
  return o;
}

Value Tape::affine(Value a, double alpha, double beta) {
  Mat out = (alpha * nodes_[a.idx].val.array() + beta).matrix();
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi, alpha](Tape& t) {
      t.nodes_[ai].grad += alpha * t.nodes_[oi].grad;
    };
  }
  return o;
}

Value Tape::add_const(Value a, const Mat& c) {
  Mat out = nodes_[a.idx].val + c;
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) { t.nodes_[ai].grad += t.nodes_[oi].grad; };
  }
  return o;
}

Value Tape::sigmoid(Value a) {
  Mat out = (1.0 / (1.0 + (-nodes_[a.idx].val.array()).exp())).matrix();
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      const Mat& y = t.nodes_[oi].val;
      t.nodes_[ai].grad.array() +=
          t.nodes_[oi].grad.array() * y.array() * (1.0 - y.array());
    };
  }
  return o;
}

Value Tape::tanh(Value a) {
  Mat out = nodes_[a.idx].val.array().tanh().matrix();
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      const Mat& y = t.nodes_[oi].val;
      t.nodes_[ai].grad.array() +=
          t.nodes_[oi].grad.array() * (1.0 - y.array().square());
    };
  }
  return o;
}

Value Tape::relu(Value a) {
  Mat out = nodes_[a.idx].val.cwiseMax(0.0);
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      const Mat& x = t.nodes_[ai].val;
      t.nodes_[ai].grad.array() +=
          t.nodes_[oi].grad.array() * (x.array() > 0.0).cast<double>();
    };
  }
  return o;
}

Value Tape::softplus(Value a) {
  const Mat& x = nodes_[a.idx].val;
  Mat out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = softplus_scalar(x(i, j));
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      const Mat& x = t.nodes_[ai].val;
      t.nodes_[ai].grad.array() +=
          t.nodes_[oi].grad.array() * (1.0 / (1.0 + (-x.array()).exp()));
    };
  }
  return o;
}

Value Tape::log(Value a) {
  Mat out = nodes_[a.idx].val.array().log().matrix();
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      t.nodes_[ai].grad.array() +=
          t.nodes_[oi].grad.array() / t.nodes_[ai].val.array();
    };
  }
  return o;
}

Value Tape::clamp(Value a, double lo, double hi) {
  Mat out = nodes_[a.idx].val.cwiseMax(lo).cwiseMin(hi);
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi, lo, hi](Tape& t) {
      const Mat& x = t.nodes_[ai].val;
      t.nodes_[ai].grad.array() +=
          t.nodes_[oi].grad.array() *
          ((x.array() > lo) && (x.array() < hi)).cast<double>();
    };
  }
  return o;
}

Value Tape::softmax_cols(Value a) {
  Mat out = softmax_columns(nodes_[a.idx].val);
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      const Mat& y = t.nodes_[oi].val;
      const Mat& g = t.nodes_[oi].grad;
      Mat& da = t.nodes_[ai].grad;
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const double dot = g.col(j).dot(y.col(j));
        da.col(j).array() += y.col(j).array() * (g.col(j).array() - dot);
      }
    };
  }
  return o;
}

Value Tape::log_softmax_cols(Value a) {
  Mat out = log_softmax_columns(nodes_[a.idx].val);
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      const Mat& y = t.nodes_[oi].val;  // log-probs
      const Mat& g = t.nodes_[oi].grad;
      Mat& da = t.nodes_[ai].grad;
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const double gsum = g.col(j).sum();
        da.col(j).array() += g.col(j).array() - y.col(j).array().exp() * gsum;
      }
    };
  }
  return o;
}

Value Tape::rows(Value a, int r0, int n) {
  Mat out = nodes_[a.idx].val.middleRows(r0, n);
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi, r0, n](Tape& t) {
      t.nodes_[ai].grad.middleRows(r0, n) += t.nodes_[oi].grad;
    };
  }
  return o;
}

Value Tape::concat_rows(const std::vector<Value>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  Eigen::Index rows = 0;
  const Eigen::Index cols = nodes_[parts[0].idx].val.cols();
  bool rg = false;
  for (Value p : parts) {
    rows += nodes_[p.idx].val.rows();
    rg = rg || needs(p);
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  std::vector<int> idxs;
  std::vector<int> offs;
  std::vector<int> lens;
  for (Value p : parts) {
    const Mat& v = nodes_[p.idx].val;
    out.middleRows(r, v.rows()) = v;
    idxs.push_back(p.idx);
    offs.push_back(static_cast<int>(r));
    lens.push_back(static_cast<int>(v.rows()));
    r += v.rows();
  }
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [idxs, offs, lens, oi](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      for (std::size_t k = 0; k < idxs.size(); ++k) {
        if (t.nodes_[idxs[k]].requires_grad)
          t.nodes_[idxs[k]].grad += g.middleRows(offs[k], lens[k]);
      }
    };
  }
  return o;
}

Value Tape::concat_cols(const std::vector<Value>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  Eigen::Index cols = 0;
  const Eigen::Index rows = nodes_[parts[0].idx].val.rows();
  bool rg = false;
  for (Value p : parts) {
    cols += nodes_[p.idx].val.cols();
    rg = rg || needs(p);
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  std::vector<int> idxs, offs, lens;
  for (Value p : parts) {
    const Mat& v = nodes_[p.idx].val;
    out.middleCols(c, v.cols()) = v;
    idxs.push_back(p.idx);
    offs.push_back(static_cast<int>(c));
    lens.push_back(static_cast<int>(v.cols()));
    c += v.cols();
  }
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [idxs, offs, lens, oi](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      for (std::size_t k = 0; k < idxs.size(); ++k) {
        if (t.nodes_[idxs[k]].requires_grad)
          t.nodes_[idxs[k]].grad += g.middleCols(offs[k], lens[k]);
      }
    };
  }
  return o;
}

Value Tape::permute_cols(Value a, std::vector<int> perm) {
  const Mat& av = nodes_[a.idx].val;
  Mat out(av.rows(), static_cast<Eigen::Index>(perm.size()));
  for (std::size_t j = 0; j < perm.size(); ++j) out.col(j) = av.col(perm[j]);
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi, perm = std::move(perm)](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      Mat& da = t.nodes_[ai].grad;
      for (std::size_t j = 0; j < perm.size(); ++j) da.col(perm[j]) += g.col(j);
    };
  }
  return o;
}

Value Tape::embed_cols(Value table, std::vector<int> ids) {
  const Mat& tv = nodes_[table.idx].val;
  Mat out(tv.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t b = 0; b < ids.size(); ++b) {
    if (ids[b] < 0 || ids[b] >= tv.cols())
      throw std::out_of_range("embed_cols: id out of range");
    out.col(b) = tv.col(ids[b]);
  }
  const bool rg = needs(table);
  const int ti = table.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ti, oi, ids = std::move(ids)](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      Mat& dt = t.nodes_[ti].grad;
      for (std::size_t b = 0; b < ids.size(); ++b) dt.col(ids[b]) += g.col(b);
    };
  }
  return o;
}

Value Tape::im2col_time(Value x, int t_len, int window) {
  const Mat& xv = nodes_[x.idx].val;
  const int m = static_cast<int>(xv.rows());
  if (t_len <= 0 || xv.cols() % t_len != 0)
    throw std::invalid_argument("im2col_time: cols not a multiple of t_len");
  const int batch = static_cast<int>(xv.cols()) / t_len;
  if (window < 1 || window > t_len)
    throw std::invalid_argument("im2col_time: bad window");
  const int p = t_len - window + 1;
  Mat out(static_cast<Eigen::Index>(m) * window, static_cast<Eigen::Index>(p) * batch);
  for (int b = 0; b < batch; ++b) {
    for (int pos = 0; pos < p; ++pos) {
      for (int k = 0; k < window; ++k)
        out.block(static_cast<Eigen::Index>(k) * m, static_cast<Eigen::Index>(b) * p + pos, m, 1) =
            xv.col(static_cast<Eigen::Index>(b) * t_len + pos + k);
    }
  }
  const bool rg = needs(x);
  const int xi = x.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [xi, oi, m, t_len, window, p, batch](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      Mat& dx = t.nodes_[xi].grad;
      for (int b = 0; b < batch; ++b) {
        for (int pos = 0; pos < p; ++pos) {
          for (int k = 0; k < window; ++k)
            dx.col(static_cast<Eigen::Index>(b) * t_len + pos + k) +=
                g.block(static_cast<Eigen::Index>(k) * m,
                        static_cast<Eigen::Index>(b) * p + pos, m, 1);
        }
      }
    };
  }
  return o;
}

Value Tape::max_over_blocks(Value x, int block) {
  const Mat& xv = nodes_[x.idx].val;
  if (block <= 0 || xv.cols() % block != 0)
    throw std::invalid_argument("max_over_blocks: cols not a multiple of block");
  const int batch = static_cast<int>(xv.cols()) / block;
  const int m = static_cast<int>(xv.rows());
  Mat out(m, batch);
  std::vector<int> arg(static_cast<std::size_t>(m) * batch);
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < m; ++i) {
      int best = 0;
      double bv = xv(i, static_cast<Eigen::Index>(b) * block);
      for (int pp = 1; pp < block; ++pp) {
        const double v = xv(i, static_cast<Eigen::Index>(b) * block + pp);
        if (v > bv) {
          bv = v;
          best = pp;
        }
      }
      out(i, b) = bv;
      arg[static_cast<std::size_t>(b) * m + i] = best;
    }
  }
  const bool rg = needs(x);
  const int xi = x.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [xi, oi, block, batch, m, arg = std::move(arg)](Tape& t) {
      const Mat& g = t.nodes_[oi].grad;
      Mat& dx = t.nodes_[xi].grad;
      for (int b = 0; b < batch; ++b)
        for (int i = 0; i < m; ++i)
          dx(i, static_cast<Eigen::Index>(b) * block +
                     arg[static_cast<std::size_t>(b) * m + i]) += g(i, b);
    };
  }
  return o;
}

Value Tape::sum_all(Value a) {
  Mat out(1, 1);
  out(0, 0) = nodes_[a.idx].val.sum();
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi](Tape& t) {
      t.nodes_[ai].grad.array() += t.nodes_[oi].grad(0, 0);
    };
  }
  return o;
}

Value Tape::mean_all(Value a) {
  const Mat& av = nodes_[a.idx].val;
  const double n = static_cast<double>(av.rows() * av.cols());
  Mat out(1, 1);
  out(0, 0) = av.sum() / n;
  const bool rg = needs(a);
  const int ai = a.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [ai, oi, n](Tape& t) {
      t.nodes_[ai].grad.array() += t.nodes_[oi].grad(0, 0) / n;
    };
  }
  return o;
}

Value Tape::weighted_nll(Value logp, std::vector<int> ids, std::vector<double> w) {
  const Mat& lp = nodes_[logp.idx].val;
  if (ids.size() != w.size() || static_cast<Eigen::Index>(ids.size()) != lp.cols())
    throw std::invalid_argument("weighted_nll: ids/weights must match columns");
  double acc = 0.0;
  for (std::size_t b = 0; b < ids.size(); ++b) {
    if (ids[b] < 0 || ids[b] >= lp.rows())
      throw std::out_of_range("weighted_nll: id out of range");
    acc -= w[b] * lp(ids[b], static_cast<Eigen::Index>(b));
  }
  Mat out(1, 1);
  out(0, 0) = acc;
  const bool rg = needs(logp);
  const int li = logp.idx;
  Value o = push(std::move(out), rg, nullptr);
  const int oi = o.idx;
  if (rg) {
    nodes_[oi].back = [li, oi, ids = std::move(ids), w = std::move(w)](Tape& t) {
      const double g = t.nodes_[oi].grad(0, 0);
      Mat& dl = t.nodes_[li].grad;
      for (std::size_t b = 0; b < ids.size(); ++b)
        dl(ids[b], static_cast<Eigen::Index>(b)) -= w[b] * g;
    };
  }
  return o;
}

void Tape::backward(Value root) {
  if (!root.valid()) throw std::invalid_argument("backward: invalid root");
  Node& r = nodes_[root.idx];
  if (r.val.rows() != 1 || r.val.cols() != 1)
    throw std::invalid_argument("backward: root must be a 1x1 scalar node");
  if (!r.requires_grad)
    throw std::invalid_argument("backward: root does not depend on any leaf");
  for (auto& n : nodes_) {
    if (n.requires_grad) n.grad = Mat::Zero(n.val.rows(), n.val.cols());
  }
  r.grad(0, 0) = 1.0;
  for (int i = root.idx; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.back) n.back(*this);
  }
}

void adam_step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
               AdamState& state, double lr, bool minimize) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: params/grads size mismatch");
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i] = Mat::Zero(params[i]->rows(), params[i]->cols());
      state.v[i] = Mat::Zero(params[i]->rows(), params[i]->cols());
    }
  }
  state.step += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double sign = minimize ? -1.0 : 1.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Mat& g = *grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Mat mhat = state.m[i] / b1t;
    const Mat vhat = state.v[i] / b2t;
    params[i]->array() += sign * lr * (mhat.array() / (vhat.array().sqrt() + state.eps));
  }
}

}  // namespace prefixgan::ad
