#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace prefixgan {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key = value experiment configuration with command-line overrides.
struct TrainConfig {
  std::string mode = "synthetic";      // synthetic | real
  std::string algorithm = "seqgan";    // seqgan | relgan
  std::string variant = "two_segment"; // baseline | full_prefix | two_segment

  std::string train_path;
  std::string test_path;
  std::string out_dir = "runs/out";
  std::vector<std::uint64_t> seeds = {7, 8, 9, 10, 11};

  int t_max = 10;          // sequence length grid
  int vocab_cap = 50;      // synthetic content vocabulary size
  std::uint64_t oracle_seed = 1234;
  int oracle_hidden = 32;
  int gen_hidden = 32;

  int disc_emb = 32;
  int disc_filters = 16;
  std::vector<int> disc_filter_sizes = {2, 3};
  int disc_heads = 0;  // 0 = default for the algorithm (seqgan 1, relgan 2)

  int n_train_synthetic = 2000;
  int n_test_synthetic = 500;
  int n_eval_samples = 300;

  int batch_size = 64;
  int pretrain_epochs = 8;
  int adv_epochs = 20;
  int g_steps = 1;
  int d_steps = 5;
  int rollout_n = 16;

  double lr_pretrain = 1e-2;
  double lr_g = 1e-2;
  double lr_d = 1e-3;

  double tau_target = 10.0;
  int tau_warmup = 20;
  std::string tau_shape = "exponential";  // constant | exponential

  bool mean_baseline = false;
  std::vector<int> cuts_override;  // empty, or {t_mid, t_full}
  bool wall_clock = true;

  int resolved_heads() const { return disc_heads > 0 ? disc_heads : (algorithm == "relgan" ? 2 : 1); }
};

/// Parse `key = value` lines ('#' comments); unknown keys are errors.
TrainConfig parse_config_lines(const std::vector<std::string>& lines);

/// Load a config file and apply --key=value overrides in order.
TrainConfig load_config(const std::filesystem::path& file,
                        const std::vector<std::string>& overrides);

void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Throws ConfigError with a field-level message on the first violation.
void validate_config(const TrainConfig& cfg);

/// Canonical serialization of the effective config (deterministic bytes).
std::string config_to_text(const TrainConfig& cfg);

}  // namespace prefixgan
