#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ocelad/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive online metric learning experiments"};
  app.require_subcommand(1);

  std::string gen_config;
  auto* gen = app.add_subcommand("generate", "Write per-trial dataset and constraint stream files");
  gen->add_option("config", gen_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  std::string run_config;
  unsigned threads = 0;
  auto* run = app.add_subcommand("run", "Run every algorithm over every trial and write metrics CSVs");
  run->add_option("config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--threads", threads, "Worker count (default: OCELAD_THREADS or hardware concurrency)");

  std::vector<std::string> csvs;
  std::string kind = "knn";
  std::string out = "plot.svg";
  std::vector<std::int64_t> changes;
  double threshold = 0.8;
  std::string title;
  auto* plot = app.add_subcommand("plot", "Render metrics CSVs as an SVG line chart");
  plot->add_option("csv", csvs, "Metrics CSV files, one curve each")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "knn, nmi or regret")->check(CLI::IsMember({"knn", "nmi", "regret"}));
  plot->add_option("-o,--out", out, "Output SVG path");
  plot->add_option("--changes", changes, "Times to mark with vertical lines")->delimiter(',');
  plot->add_option("--threshold", threshold, "NMI threshold for the nmi kind");
  plot->add_option("--title", title, "Chart title");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      for (const auto& p : ocelad::cmd_generate(gen_config)) std::printf("%s\n", p.string().c_str());
    } else if (*run) {
      const unsigned n = threads ? threads : ocelad::worker_count();
      for (const auto& p : ocelad::cmd_run(run_config, n)) std::printf("%s\n", p.string().c_str());
    } else if (*plot) {
      ocelad::PlotSpec spec;
      spec.kind = ocelad::parse_plot_kind(kind);
      spec.nmi_threshold = threshold;
      spec.change_points = changes;
      spec.title = title;
      std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
      ocelad::cmd_plot(paths, spec, out);
      std::printf("%s\n", out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
