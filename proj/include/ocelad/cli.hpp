#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ocelad/experiment.hpp"

namespace ocelad {

/// Writes trial_<k>/dataset.csv and trial_<k>/stream.txt under the outputs directory.
std::vector<std::filesystem::path> cmd_generate(const std::filesystem::path& config_path);

/// Writes <outputs>/<algorithm name>.csv for every algorithm.
std::vector<std::filesystem::path> cmd_run(const std::filesystem::path& config_path, unsigned threads);

enum class PlotKind { knn, nmi, regret };
PlotKind parse_plot_kind(const std::string& s);

struct PlotSpec {
  PlotKind kind = PlotKind::knn;
  double nmi_threshold = 0.8;
  std::vector<std::int64_t> change_points;
  std::string title;
};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Per-checkpoint aggregate over trials: mean kNN error, fraction of trials with
/// NMI above the threshold, or mean cumulative regret.
Series aggregate_series(const std::vector<MetricsRow>& rows, const PlotSpec& spec, std::string label);

void render_svg(std::ostream& os, const std::vector<Series>& series, const PlotSpec& spec);

/// Reads each CSV, renders one polyline per file and writes the SVG. Nothing is
/// written if any input is malformed or empty.
void cmd_plot(const std::vector<std::filesystem::path>& csv_paths, const PlotSpec& spec,
              const std::filesystem::path& out_path);

}  // namespace ocelad
