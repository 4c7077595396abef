#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace prefixgan {

/// Seedable random stream. All distributions are implemented here rather than
/// with std:: distribution objects so that a given seed produces the same
/// draws on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return std::ldexp(static_cast<double>(eng_() >> 11), -53);
  }

  /// Standard normal via Box-Muller. Draws two uniforms per call.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Standard Gumbel(0, 1): -log(-log(U)).
  double gumbel() {
    double u = uniform();
    constexpr double tiny = 1e-300;
    if (u < tiny) u = tiny;
    if (u > 1.0 - 1e-16) u = 1.0 - 1e-16;
    return -std::log(-std::log(u));
  }

  /// Index in [0, n) from unnormalized non-negative weights.
  template <typename Vec>
  int categorical(const Vec& w, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i];
    if (!(total > 0.0)) throw std::runtime_error("categorical: weights sum to zero");
    double u = uniform() * total;
    for (int i = 0; i < n; ++i) {
      u -= w[i];
      if (u < 0.0) return i;
    }
    return n - 1;
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * n) % n;
  }

  /// Child stream with a seed derived from this stream.
  Rng split() { return Rng(next_u64()); }

  std::string state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }

  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    if (is.fail()) throw std::runtime_error("Rng::set_state: malformed state string");
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace prefixgan
