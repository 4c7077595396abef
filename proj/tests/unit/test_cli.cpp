#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prefixgan/runner.hpp"

using namespace prefixgan;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

TrainConfig tiny_synthetic_config(const fs::path& out_dir) {
  TrainConfig cfg;
  cfg.mode = "synthetic";
  cfg.algorithm = "seqgan";
  cfg.variant = "two_segment";
  cfg.out_dir = out_dir.string();
  cfg.seeds = {7};
  cfg.t_max = 5;
  cfg.vocab_cap = 8;
  cfg.oracle_hidden = 8;
  cfg.gen_hidden = 8;
  cfg.disc_emb = 6;
  cfg.disc_filters = 4;
  cfg.disc_filter_sizes = {2};
  cfg.n_train_synthetic = 32;
  cfg.n_test_synthetic = 16;
  cfg.n_eval_samples = 16;
  cfg.batch_size = 8;
  cfg.pretrain_epochs = 1;
  cfg.adv_epochs = 1;
  cfg.g_steps = 1;
  cfg.d_steps = 1;
  cfg.rollout_n = 2;
  cfg.wall_clock = false;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing: comments, overrides, unknown keys, lists") {
  const std::vector<std::string> lines{
      "# experiment",
      "mode = synthetic",
      "seeds = 1, 2, 3",
      "T = 12  # grid",
      "disc_filter_sizes = 2,3,4",
      "lr_g = 5e-3",
      "mean_baseline = true",
  };
  TrainConfig cfg = parse_config_lines(lines);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(cfg.t_max == 12);
  CHECK(cfg.disc_filter_sizes == std::vector<int>{2, 3, 4});
  CHECK(cfg.lr_g == doctest::Approx(5e-3));
  CHECK(cfg.mean_baseline);

  apply_override(cfg, "variant", "baseline");
  CHECK(cfg.variant == "baseline");
  CHECK_THROWS_AS(apply_override(cfg, "nonsense", "1"), ConfigError);
  CHECK_THROWS_AS(parse_config_lines({"T twelve"}), ConfigError);
  CHECK_THROWS_AS(parse_config_lines({"T = twelve"}), ConfigError);
}

TEST_CASE("config validation produces field-level messages") {
  TrainConfig cfg;
  cfg.mode = "imaginary";
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mode") != std::string::npos);
  }

  cfg = TrainConfig{};
  cfg.seeds.clear();
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = TrainConfig{};
  cfg.batch_size = 0;
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("batch_size") != std::string::npos);
  }

  cfg = TrainConfig{};
  cfg.mode = "real";
  cfg.train_path = "/nonexistent/file.txt";
  cfg.test_path = "/nonexistent/file.txt";
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg = TrainConfig{};
  cfg.cuts_override = {4, 3};
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("config round-trips through its canonical text form") {
  TrainConfig cfg = tiny_synthetic_config("runs/x");
  cfg.seeds = {3, 9};
  cfg.cuts_override = {2, 5};
  std::vector<std::string> lines;
  std::istringstream is(config_to_text(cfg));
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  const TrainConfig back = parse_config_lines(lines);
  CHECK(config_to_text(back) == config_to_text(cfg));
}

TEST_CASE("run_experiment: tiny synthetic smoke run emits every artifact") {
  const fs::path dir = fs::temp_directory_path() / "pgan_run_smoke";
  fs::remove_all(dir);
  TrainConfig cfg = tiny_synthetic_config(dir);
  REQUIRE(run_experiment(cfg) == 0);

  for (const char* f :
       {"config.cfg", "vocab.txt", "oracle.bin", "train.txt", "test.txt", "aggregate.csv",
        "nll_gen.png", "nll_oracle.png"})
    CHECK(fs::exists(dir / f));
  for (const char* f : {"epochs.csv", "final.csv", "pretrain_loss.csv"})
    CHECK(fs::exists(dir / "seed_7" / f));
  for (const char* f : {"config.cfg", "generator.bin", "discriminator.bin", "rng_state.txt"})
    CHECK(fs::exists(dir / "seed_7" / "checkpoint" / f));

  // Reload the checkpoint and rescore the test corpus through the eval path.
  const MetricRecord rec =
      eval_generator_file(dir / "seed_7" / "checkpoint" / "generator.bin", dir / "vocab.txt",
                          dir / "test.txt", 8, 3);
  CHECK(rec.n_samples == 8);
  fs::remove_all(dir);
}

TEST_CASE("repeated runs with one seed are byte-identical") {
  const fs::path dir_a = fs::temp_directory_path() / "pgan_det_a";
  const fs::path dir_b = fs::temp_directory_path() / "pgan_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  TrainConfig cfg = tiny_synthetic_config(dir_a);
  REQUIRE(run_experiment(cfg) == 0);
  cfg.out_dir = dir_b.string();
  REQUIRE(run_experiment(cfg) == 0);
  for (const char* rel : {"seed_7/epochs.csv", "seed_7/final.csv", "aggregate.csv",
                          "seed_7/pretrain_loss.csv", "vocab.txt", "train.txt"})
    CHECK(slurp(dir_a / rel) == slurp(dir_b / rel));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("aggregate rows recompute from per-seed finals") {
  std::vector<SeedFinal> finals;
  for (int i = 0; i < 3; ++i) {
    SeedFinal f;
    f.seed = i;
    f.record.bleu2 = 0.5 + 0.1 * i;
    f.record.bleu3 = 0.4;
    f.record.bleu4 = 0.3;
    f.record.bleu5 = 0.2;
    f.record.nll_gen = 2.0 - 0.5 * i;
    f.record.nll_oracle = 6.0 + i;
    f.record.n_samples = 10;
    finals.push_back(f);
  }
  const fs::path file = fs::temp_directory_path() / "pgan_aggregate.csv";
  write_aggregate_csv(file, finals);
  std::ifstream is(file);
  std::string line;
  std::getline(is, line);  // header
  bool saw_bleu2 = false, saw_oracle = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string name, mean_s, std_s, n_s;
    std::getline(ls, name, ',');
    std::getline(ls, mean_s, ',');
    std::getline(ls, std_s, ',');
    std::getline(ls, n_s, ',');
    CHECK(n_s == "3");
    if (name == "bleu2") {
      saw_bleu2 = true;
      CHECK(std::stod(mean_s) == doctest::Approx(0.6).epsilon(1e-9));
      CHECK(std::stod(std_s) == doctest::Approx(0.1).epsilon(1e-9));
    }
    if (name == "nll_oracle") {
      saw_oracle = true;
      CHECK(std::stod(mean_s) == doctest::Approx(7.0).epsilon(1e-9));
      CHECK(std::stod(std_s) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  CHECK(saw_bleu2);
  CHECK(saw_oracle);
  fs::remove(file);
}

TEST_CASE("compare: a run against itself has all-zero deltas") {
  std::vector<SeedFinal> finals;
  for (int i = 0; i < 3; ++i) {
    SeedFinal f;
    f.seed = i;
    f.record.bleu2 = 0.6;
    f.record.nll_gen = 1.5;
    finals.push_back(f);
  }
  const auto deltas = compare_finals(finals, finals);
  for (const auto& d : deltas) {
    CHECK(d.delta == 0.0);
    CHECK(d.wins_b == 0);
  }
}

TEST_CASE("compare: mismatched schemas are an error") {
  SeedFinal with_oracle;
  with_oracle.record.nll_oracle = 5.0;
  SeedFinal without_oracle;
  CHECK_THROWS(compare_finals({with_oracle}, {without_oracle}));
}

TEST_CASE("final.csv round-trips through read_final_csv") {
  MetricRecord rec;
  rec.bleu2 = 0.81234567;
  rec.bleu3 = 0.6;
  rec.bleu4 = 0.4;
  rec.bleu5 = 0.25;
  rec.nll_gen = 1.875;
  rec.nll_oracle = 6.125;
  rec.n_samples = 200;
  const fs::path file = fs::temp_directory_path() / "pgan_final.csv";
  write_final_csv(file, rec);
  const MetricRecord back = read_final_csv(file);
  CHECK(back.bleu2 == rec.bleu2);
  CHECK(back.nll_gen == rec.nll_gen);
  REQUIRE(back.nll_oracle.has_value());
  CHECK(*back.nll_oracle == *rec.nll_oracle);
  CHECK(back.n_samples == 200);
  fs::remove(file);
}
