#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace prefixgan {

struct PlotSeries {
  std::string label;
  std::vector<double> y;  // x is the index (epoch)
};

/// Render line curves into an RGB PNG with labeled, ticked axes.
void write_curves_png(const std::filesystem::path& file, const std::string& x_label,
                      const std::string& y_label, const std::vector<PlotSeries>& series,
                      int width = 720, int height = 480);

}  // namespace prefixgan
