#include "ocelad/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ocelad/errors.hpp"
#include "ocelad/textio.hpp"

namespace ocelad {

namespace fs = std::filesystem;

namespace {

std::string trial_dir_name(int trial) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%03d", trial);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << content;
  if (!out) throw InvalidInput("write failed for " + path.string());
}

}  // namespace

std::vector<fs::path> cmd_generate(const fs::path& config_path) {
  const ExperimentFile exp = load_experiment(config_path);
  if (exp.replay) throw InvalidInput("generate: config uses a replay source, nothing to generate");
  std::vector<fs::path> written;
  for (int trial = 0; trial < exp.trials; ++trial) {
    const std::uint64_t seed = trial_seed(exp.scenario.seed, trial);
    Rng data_rng = make_rng(seed, SeedStream::dataset);
    const Dataset data = generate_dataset(exp.scenario, data_rng);
    Rng stream_rng = make_rng(seed, SeedStream::stream);
    const std::vector<Constraint> stream = constraint_stream(exp.scenario, data, stream_rng);

    const fs::path dir = exp.outputs / trial_dir_name(trial);
    std::ostringstream ds;
    write_dataset_csv(ds, data);
    write_file(dir / "dataset.csv", ds.str());
    std::ostringstream ss;
    write_stream(ss, stream);
    write_file(dir / "stream.txt", ss.str());
    written.push_back(dir / "dataset.csv");
    written.push_back(dir / "stream.txt");
  }
  return written;
}

std::vector<fs::path> cmd_run(const fs::path& config_path, unsigned threads) {
  const ExperimentFile exp = load_experiment(config_path);
  if (exp.algorithms.empty()) throw InvalidInput("algorithms: at least one algorithm is required");
  const std::vector<AlgorithmResult> results = run_experiment(exp, threads);
  std::vector<fs::path> written;
  for (const AlgorithmResult& r : results) {
    std::ostringstream os;
    write_metrics_csv(os, r.rows);
    const fs::path path = exp.outputs / (r.name + ".csv");
    write_file(path, os.str());
    written.push_back(path);
  }
  return written;
}

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "knn") return PlotKind::knn;
  if (s == "nmi") return PlotKind::nmi;
  if (s == "regret") return PlotKind::regret;
  throw InvalidInput("plot kind: expected knn, nmi or regret, got '" + s + "'");
}

Series aggregate_series(const std::vector<MetricsRow>& rows, const PlotSpec& spec, std::string label) {
  std::map<std::int64_t, std::pair<double, int>> acc;
  for (const MetricsRow& r : rows) {
    double v = 0.0;
    switch (spec.kind) {
      case PlotKind::knn: v = r.knn_error; break;
      case PlotKind::nmi: v = r.nmi > spec.nmi_threshold ? 1.0 : 0.0; break;
      case PlotKind::regret: v = r.regret_cum; break;
    }
    auto& [sum, count] = acc[r.t];
    sum += v;
    ++count;
  }
  Series s{std::move(label), {}};
  for (const auto& [t, sc] : acc) s.points.emplace_back(static_cast<double>(t), sc.first / sc.second);
  return s;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 150.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

const char* kind_label(PlotKind k) {
  switch (k) {
    case PlotKind::knn: return "kNN error";
    case PlotKind::nmi: return "P(NMI > threshold)";
    case PlotKind::regret: return "cumulative regret";
  }
  return "";
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void render_svg(std::ostream& os, const std::vector<Series>& series, const PlotSpec& spec) {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x0 = x1 = x;
        first = false;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      if (spec.kind == PlotKind::regret) {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  auto f = [](double v) { return format_fixed(v, 2); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(kWidth) << "\" height=\"" << f(kHeight)
     << "\" viewBox=\"0 0 " << f(kWidth) << ' ' << f(kHeight) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << f(kWidth) << "\" height=\"" << f(kHeight) << "\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    os << "<text x=\"" << f(kLeft) << "\" y=\"20.00\" font-size=\"14\">" << escape_xml(spec.title) << "</text>\n";
  }
  os << "<rect x=\"" << f(kLeft) << "\" y=\"" << f(kTop) << "\" width=\"" << f(pw) << "\" height=\"" << f(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << f(kLeft - 5) << "\" y=\"" << f(py(yv) + 4) << "\" font-size=\"10\" text-anchor=\"end\">"
       << format_fixed(yv, 2) << "</text>\n";
    const double xv = x0 + (x1 - x0) * i / 4.0;
    os << "<text x=\"" << f(px(xv)) << "\" y=\"" << f(kHeight - kBottom + 15)
       << "\" font-size=\"10\" text-anchor=\"middle\">" << format_fixed(xv, 0) << "</text>\n";
  }
  os << "<text x=\"" << f(kLeft + pw / 2) << "\" y=\"" << f(kHeight - 5)
     << "\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";
  os << "<text x=\"15.00\" y=\"" << f(kTop + ph / 2) << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15.00 "
     << f(kTop + ph / 2) << ")\">" << kind_label(spec.kind) << "</text>\n";
  for (std::int64_t cp : spec.change_points) {
    const double x = static_cast<double>(cp);
    if (x < x0 || x > x1) continue;
    os << "<line class=\"change\" x1=\"" << f(px(x)) << "\" y1=\"" << f(kTop) << "\" x2=\"" << f(px(x)) << "\" y2=\""
       << f(kTop + ph) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < series[i].points.size(); ++j) {
      if (j) os << ' ';
      os << f(px(series[i].points[j].first)) << ',' << f(py(series[i].points[j].second));
    }
    os << "\"/>\n";
    const double ly = kTop + 15.0 * static_cast<double>(i + 1);
    os << "<text x=\"" << f(kWidth - kRight + 10) << "\" y=\"" << f(ly) << "\" font-size=\"11\" fill=\"" << color
       << "\">" << escape_xml(series[i].label) << "</text>\n";
  }
  os << "</svg>\n";
}

void cmd_plot(const std::vector<fs::path>& csv_paths, const PlotSpec& spec, const fs::path& out_path) {
  if (csv_paths.empty()) throw InvalidInput("plot: no CSV given");
  std::vector<Series> series;
  for (const fs::path& p : csv_paths) {
    std::ifstream in(p);
    if (!in) throw InvalidInput("cannot read " + p.string());
    std::vector<MetricsRow> rows;
    try {
      rows = read_metrics_csv(in);
    } catch (const InvalidInput& e) {
      throw InvalidInput(p.string() + ": " + e.what());
    }
    if (rows.empty()) throw InvalidInput(p.string() + ": no data rows");
    series.push_back(aggregate_series(rows, spec, p.stem().string()));
  }
  std::ostringstream os;
  render_svg(os, series, spec);
  write_file(out_path, os.str());
}

}  // namespace ocelad
