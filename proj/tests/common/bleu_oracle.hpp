#pragma once

// Test-only brute-force BLEU: naive n-gram listing over std::map, independent
// of the library implementation it cross-checks.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace pgan_test {

using Tokens = std::vector<std::string>;

inline double bleu_oracle(const Tokens& hyp, const std::vector<Tokens>& refs, int n) {
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    std::map<Tokens, int> hyp_counts;
    for (std::size_t i = 0; i + k <= hyp.size(); ++i)
      hyp_counts[Tokens(hyp.begin() + i, hyp.begin() + i + k)]++;
    long total = 0, hit = 0;
    for (const auto& [gram, cnt] : hyp_counts) {
      total += cnt;
      int best = 0;
      for (const auto& ref : refs) {
        int c = 0;
        for (std::size_t i = 0; i + k <= ref.size(); ++i)
          if (std::equal(gram.begin(), gram.end(), ref.begin() + i)) ++c;
        best = std::max(best, c);
      }
      hit += std::min<long>(cnt, best);
    }
    const double p = total > 0 ? static_cast<double>(hit) / total : 0.0;
    log_sum += std::log(p > 0 ? p : 1e-9);
  }
  const int c = static_cast<int>(hyp.size());
  int best_r = static_cast<int>(refs[0].size());
  for (const auto& ref : refs) {
    const int r = static_cast<int>(ref.size());
    const int d_new = std::abs(r - c), d_old = std::abs(best_r - c);
    if (d_new < d_old || (d_new == d_old && r < best_r)) best_r = r;
  }
  const double bp = c >= best_r ? 1.0 : std::exp(1.0 - static_cast<double>(best_r) / c);
  return bp * std::exp(log_sum / n);
}

}  // namespace pgan_test
