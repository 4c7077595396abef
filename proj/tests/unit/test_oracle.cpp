#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "prefixgan/oracle.hpp"

using namespace prefixgan;

TEST_CASE("init_oracle: seeded determinism and seed sensitivity") {
  const OracleModel a = init_oracle(7, 50, 32);
  const OracleModel b = init_oracle(7, 50, 32);
  const OracleModel c = init_oracle(8, 50, 32);
  CHECK(param_checksum(a.lm) == param_checksum(b.lm));
  CHECK(param_checksum(a.lm) != param_checksum(c.lm));
  CHECK_THROWS(init_oracle(1, 1, 32));
  CHECK_THROWS(init_oracle(1, 50, 0));
}

TEST_CASE("oracle per-step distributions are normalized on random prefixes") {
  const OracleModel oracle = init_oracle(7, 5000, 32);
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = rng.uniform_int(6);
    std::vector<int> prefix;
    for (int k = 0; k < len; ++k) prefix.push_back(rng.uniform_int(5000));
    const Vec p = step_distribution(oracle.lm, kOracleStartId, prefix);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(std::abs(p.sum() - 1.0) < 1e-6);
  }
}

TEST_CASE("oracle_sample: counts, lengths, and the one-hot degenerate case") {
  const OracleModel oracle = init_oracle(3, 20, 8);
  Rng rng(5);
  const Corpus c = oracle_sample(oracle, 100, 12, rng);
  CHECK(c.size() == 100);
  CHECK(c.T == 12);
  for (const auto& s : c.sequences) {
    CHECK(s.true_len == 12);
    for (int id : s.ids) {
      CHECK(id >= 0);
      CHECK(id < 20);
    }
  }

  Rng rng1(5);
  const Corpus single = oracle_sample(oracle, 1, 1, rng1);
  CHECK(single.sequences[0].true_len == 1);

  // Force a one-hot next-token distribution on token 4 at every step.
  OracleModel onehot = init_oracle(3, 6, 4);
  onehot.lm.proj.setZero();
  onehot.lm.bias.setZero();
  onehot.lm.bias(4, 0) = 50.0;
  Rng rng2(17);
  const Corpus forced = oracle_sample(onehot, 10, 5, rng2);
  for (const auto& s : forced.sequences)
    for (int id : s.ids) CHECK(id == 4);
}

TEST_CASE("nll_oracle: perfect-match sampler scores 0") {
  OracleModel onehot = init_oracle(9, 6, 4);
  onehot.lm.proj.setZero();
  onehot.lm.bias.setZero();
  onehot.lm.bias(2, 0) = 50.0;
  const SamplerFn sampler = [](int n, int t_len, Rng&) {
    Sequence s;
    s.ids.assign(t_len, 2);
    s.true_len = t_len;
    return std::vector<Sequence>(n, s);
  };
  Rng rng(1);
  const NllEstimate e = nll_oracle(onehot, sampler, 20, 5, rng);
  CHECK(std::abs(e.mean) < 1e-9);
}

TEST_CASE("nll_oracle: uniform/uniform closed form T*ln2") {
  // Zeroed projection makes every step uniform over the two tokens.
  OracleModel uniform = init_oracle(4, 2, 4);
  uniform.lm.proj.setZero();
  uniform.lm.bias.setZero();
  const SamplerFn sampler = [&uniform](int n, int t_len, Rng& rng) {
    std::vector<Sequence> out;
    for (int i = 0; i < n; ++i) {
      Sequence s;
      s.true_len = t_len;
      for (int t = 0; t < t_len; ++t) s.ids.push_back(rng.uniform_int(2));
      out.push_back(std::move(s));
    }
    return out;
  };
  Rng rng(2);
  const NllEstimate e = nll_oracle(uniform, sampler, 200, 4, rng);
  // Every sequence has identical NLL, so the estimate is exact.
  CHECK(e.mean == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(e.std_err < 1e-12);
}

TEST_CASE("nll_oracle: out-of-space ids hit the clamp, never infinity") {
  const OracleModel oracle = init_oracle(21, 10, 4);
  const SamplerFn sampler = [](int n, int t_len, Rng&) {
    Sequence s;
    s.ids.assign(t_len, -1);  // outside the oracle's space
    s.true_len = t_len;
    return std::vector<Sequence>(n, s);
  };
  Rng rng(3);
  const NllEstimate e = nll_oracle(oracle, sampler, 4, 6, rng);
  CHECK(std::isfinite(e.mean));
  CHECK(e.mean <= 6.0 * -std::log(kProbClamp) + 1e-9);
}

TEST_CASE("nll_oracle is invariant to sample order") {
  const OracleModel oracle = init_oracle(33, 12, 8);
  Rng rng(8);
  Corpus c = oracle_sample(oracle, 50, 7, rng);
  const NllEstimate forward = nll_oracle_of(oracle, c.sequences);
  std::reverse(c.sequences.begin(), c.sequences.end());
  const NllEstimate reversed = nll_oracle_of(oracle, c.sequences);
  CHECK(forward.mean == doctest::Approx(reversed.mean).epsilon(1e-12));
}

TEST_CASE("oracle self-NLL: two disjoint estimates agree within 3 combined SE") {
  const OracleModel oracle = init_oracle(7, 50, 32);
  const SamplerFn self = [&oracle](int n, int t_len, Rng& rng) {
    return oracle_sample(oracle, n, t_len, rng).sequences;
  };
  Rng rng(1234);
  const NllEstimate e1 = nll_oracle(oracle, self, 5000, 10, rng);
  const NllEstimate e2 = nll_oracle(oracle, self, 5000, 10, rng);
  const double combined = std::sqrt(e1.std_err * e1.std_err + e2.std_err * e2.std_err);
  CHECK(std::abs(e1.mean - e2.mean) < 3.0 * combined);
}

TEST_CASE("oracle checkpoint reload reproduces identical samples") {
  const OracleModel oracle = init_oracle(77, 30, 16);
  const auto file = std::filesystem::temp_directory_path() / "pgan_oracle_test.bin";
  oracle.save(file);
  const OracleModel loaded = OracleModel::load(file);
  CHECK(loaded.seed == oracle.seed);
  CHECK(param_checksum(loaded.lm) == param_checksum(oracle.lm));
  Rng r1(42), r2(42);
  const Corpus a = oracle_sample(oracle, 20, 9, r1);
  const Corpus b = oracle_sample(loaded, 20, 9, r2);
  for (std::size_t i = 0; i < a.sequences.size(); ++i)
    CHECK(a.sequences[i].ids == b.sequences[i].ids);
  std::filesystem::remove(file);
}
