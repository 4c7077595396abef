// Experiment CLI: seeded training runs, run comparison, checkpoint scoring.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>
#include <iostream>

#include "prefixgan/runner.hpp"

namespace {

int run_cmd(const std::string& config_path, const std::vector<std::string>& overrides) {
  prefixgan::TrainConfig cfg;
  try {
    cfg = prefixgan::load_config(config_path, overrides);
    prefixgan::validate_config(cfg);
  } catch (const prefixgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    return prefixgan::run_experiment(cfg, std::filesystem::path(config_path));
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prefix-evaluated adversarial sequence training"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute a config-driven experiment");
  std::string config_path;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "config file (key = value lines)")->required();
  run->add_option("--set", overrides, "override as key=value (repeatable)");
  run->allow_extras();  // bare --key=value extras are also treated as overrides

  auto* cmp = app.add_subcommand("compare", "tabulate metric deltas between two runs");
  std::string dir_a, dir_b;
  cmp->add_option("a", dir_a, "first run directory")->required();
  cmp->add_option("b", dir_b, "second run directory")->required();

  auto* ev = app.add_subcommand("eval", "score a generator checkpoint on a test corpus");
  std::string gen_path, test_path, vocab_path, out_csv;
  int n_samples = 200;
  std::uint64_t eval_seed = 7;
  ev->add_option("--generator", gen_path, "generator blob")->required();
  ev->add_option("--test", test_path, "test corpus (one sentence per line)")->required();
  ev->add_option("--vocab", vocab_path, "vocab file (default: next to the blob)");
  ev->add_option("--samples", n_samples, "generated sample count");
  ev->add_option("--seed", eval_seed, "sampling seed");
  ev->add_option("--out", out_csv, "also write the record as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  if (run->parsed()) {
    std::vector<std::string> all_overrides = overrides;
    for (const auto& extra : run->remaining()) {
      if (extra.rfind("--", 0) == 0 && extra.find('=') != std::string::npos) {
        all_overrides.push_back(extra.substr(2));
      } else {
        std::cerr << "config error: unrecognized argument '" << extra << "'\n";
        return 1;
      }
    }
    return run_cmd(config_path, all_overrides);
  }

  if (cmp->parsed()) {
    try {
      return prefixgan::compare_runs(dir_a, dir_b);
    } catch (const std::exception& e) {
      std::cerr << "compare failed: " << e.what() << "\n";
      return 2;
    }
  }

  if (ev->parsed()) {
    try {
      std::filesystem::path vp = vocab_path;
      if (vp.empty()) {
        vp = std::filesystem::path(gen_path).parent_path() / "vocab.txt";
        if (!std::filesystem::exists(vp))
          vp = std::filesystem::path(gen_path).parent_path().parent_path() / "vocab.txt";
      }
      const auto rec =
          prefixgan::eval_generator_file(gen_path, vp, test_path, n_samples, eval_seed);
      std::cout << "bleu2=" << prefixgan::format_double(rec.bleu2)
                << " bleu3=" << prefixgan::format_double(rec.bleu3)
                << " bleu4=" << prefixgan::format_double(rec.bleu4)
                << " bleu5=" << prefixgan::format_double(rec.bleu5)
                << " nll_gen=" << prefixgan::format_double(rec.nll_gen)
                << " n_samples=" << rec.n_samples << "\n";
      if (!out_csv.empty()) prefixgan::write_final_csv(out_csv, rec);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "eval failed: " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}
