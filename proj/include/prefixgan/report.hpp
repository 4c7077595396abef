#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prefixgan/metrics.hpp"

namespace prefixgan {

struct EpochRow {
  int epoch = 0;
  std::string phase;  // "pretrain" | "adversarial"
  std::optional<double> nll_oracle;
  double nll_gen = 0.0;
  double d_loss = 0.0;
  double g_objective = 0.0;
  double wall_s = 0.0;
  std::optional<double> tau;  // relaxed path only
};

struct RunSeries {
  std::vector<EpochRow> rows;
  bool has_tau = false;
};

struct SeedFinal {
  std::uint64_t seed = 0;
  MetricRecord record;
};

/// Shortest round-trippable decimal rendering ("%.17g" collapsed via "%g"
/// widths); stable across runs of the same build.
std::string format_double(double v);

void write_epochs_csv(const std::filesystem::path& file, const RunSeries& series);
void write_final_csv(const std::filesystem::path& file, const MetricRecord& rec);
MetricRecord read_final_csv(const std::filesystem::path& file);

/// Aggregate rows: metric, mean, sample std over seeds.
void write_aggregate_csv(const std::filesystem::path& file,
                         const std::vector<SeedFinal>& finals);

struct MetricDelta {
  std::string metric;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double delta = 0.0;     // b - a
  int wins_b = 0;         // paired seeds where b improves on a
  int pairs = 0;
  bool lower_is_better = false;
};

/// Per-metric deltas between two runs' per-seed finals (paired by position).
/// Throws if the metric schemas differ.
std::vector<MetricDelta> compare_finals(const std::vector<SeedFinal>& a,
                                        const std::vector<SeedFinal>& b);

}  // namespace prefixgan
