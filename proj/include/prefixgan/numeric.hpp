#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace prefixgan {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Probability floor used inside logs so mismatched tokens yield large but
/// finite penalties instead of infinities.
inline constexpr double kProbClamp = 1e-8;

inline Mat softmax_cols(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mx = x.col(j).maxCoeff();
    Vec e = (x.col(j).array() - mx).exp();
    y.col(j) = e / e.sum();
  }
  return y;
}

inline Mat log_softmax_cols(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mx = x.col(j).maxCoeff();
    const double lse = std::log((x.col(j).array() - mx).exp().sum()) + mx;
    y.col(j) = x.col(j).array() - lse;
  }
  return y;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Shannon entropy of a probability vector, in nats.
inline double entropy(const Vec& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

}  // namespace prefixgan
