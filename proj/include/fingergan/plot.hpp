#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fingergan::plot {

struct Series {
  std::string label;
  std::vector<double> x, y;  ///< non-finite points are skipped
};

struct ChartConfig {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 800;
  int height = 500;
};

/// Line chart with axes, tick labels and a legend, written as an image file
/// whose format follows the extension. Throws when no series has a finite point.
void render_line_chart(const std::vector<Series>& series, const ChartConfig& cfg, const std::filesystem::path& out);

/// L_r, d_loss and g_adv against iteration from a training metrics log.
void plot_metrics(const std::filesystem::path& metrics_tsv, const std::filesystem::path& out);
/// Rank-k accuracy from a CMC CSV.
void plot_cmc(const std::filesystem::path& cmc_csv, const std::filesystem::path& out);

}  // namespace fingergan::plot
