#pragma once

#include <optional>

#include "prefixgan/config.hpp"
#include "prefixgan/report.hpp"
#include "prefixgan/seg_relgan.hpp"
#include "prefixgan/seg_rl.hpp"

namespace prefixgan {

/// Assembled experiment inputs in model id space.
struct PipelineData {
  Vocab vocab;
  Corpus train;
  Corpus test;
  std::optional<OracleModel> oracle;  // synthetic mode only
  int oracle_offset = 0;              // model id - offset = oracle id
  SegmentPlan plan;
};

PipelineData prepare_data(const TrainConfig& cfg);

/// Oracle NLL of fresh generator samples (synthetic mode), else nullopt.
std::optional<double> eval_nll_oracle(const PipelineData& data, const GeneratorModel& gen,
                                      int n_samples, Rng& eval_rng);

struct ModelSnapshot {
  GeneratorModel gen;
  DiscriminatorModel disc;
  std::string rng_state;
};

/// MLE pretrain followed by alternating adversarial epochs on the
/// policy-gradient path; one metrics row per epoch is appended to `out`
/// as it completes (partial results survive an abort).
void train_seqgan(const TrainConfig& cfg, const PipelineData& data, GeneratorModel& gen,
                  DiscriminatorModel& disc, Rng& train_rng, Rng& eval_rng, RunSeries& out,
                  std::vector<double>* pretrain_curve = nullptr,
                  ModelSnapshot* last_good = nullptr);

/// Same schedule on the relaxed path; the temperature column follows the
/// configured schedule.
void train_relgan(const TrainConfig& cfg, const PipelineData& data, GeneratorModel& gen,
                  DiscriminatorModel& disc, Rng& train_rng, Rng& eval_rng, RunSeries& out,
                  std::vector<double>* pretrain_curve = nullptr,
                  ModelSnapshot* last_good = nullptr);

/// Full multi-seed experiment: data, per-seed pipelines, CSVs, plots,
/// checkpoints. Returns 0 on success, 2 on a mid-run failure (partial
/// results are preserved). config_source, when given, is copied verbatim
/// into the output directory.
int run_experiment(const TrainConfig& cfg,
                   const std::optional<std::filesystem::path>& config_source = std::nullopt);

/// Tabulate per-metric deltas between two run directories; returns an exit code.
int compare_runs(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b);

/// Score a saved generator on a test corpus (no oracle).
MetricRecord eval_generator_file(const std::filesystem::path& generator_blob,
                                 const std::filesystem::path& vocab_file,
                                 const std::filesystem::path& test_file, int n_samples,
                                 std::uint64_t seed);

/// Per-seed finals of a run directory, ordered by seed directory name.
std::vector<SeedFinal> load_run_finals(const std::filesystem::path& run_dir);

}  // namespace prefixgan
