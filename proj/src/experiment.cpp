#include "ocelad/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ocelad/errors.hpp"
#include "ocelad/eval.hpp"
#include "ocelad/textio.hpp"

namespace ocelad {

using nlohmann::json;

namespace {

class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw InvalidInput(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw InvalidInput(where(key) + ": missing required field");
    return obj_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw InvalidInput(where(key) + ": wrong type (" + std::string(v.type_name()) + ")");
    }
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw InvalidInput(where(key) + ": unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<Vector> parse_vectors(const json& v, const std::string& where) {
  std::vector<Vector> out;
  if (!v.is_array()) throw InvalidInput(where + ": expected an array of vectors");
  for (const json& row : v) {
    if (!row.is_array()) throw InvalidInput(where + ": expected an array of vectors");
    Vector x(static_cast<Eigen::Index>(row.size()));
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!row[k].is_number()) throw InvalidInput(where + ": entries must be numbers");
      x(static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Matrix> parse_matrices(const json& v, const std::string& where) {
  std::vector<Matrix> out;
  if (!v.is_array()) throw InvalidInput(where + ": expected an array of matrices");
  for (const json& m : v) {
    const auto rows = parse_vectors(m, where);
    if (rows.empty()) throw InvalidInput(where + ": empty matrix");
    Matrix S(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != S.cols()) throw InvalidInput(where + ": ragged matrix");
      S.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    out.push_back(std::move(S));
  }
  return out;
}

ScenarioConfig parse_scenario(const json& j) {
  FieldReader r(j, "scenario");
  ScenarioConfig cfg;
  if (r.has("preset")) {
    const auto name = r.get<std::string>("preset");
    const auto preset = preset_by_name(name);
    if (!preset) throw InvalidInput("scenario.preset: unknown preset \"" + name + "\"");
    cfg = *preset;
  }
  cfg.n_points = r.get_or<std::int64_t>("n_points", cfg.n_points);
  cfg.ambient_dim = r.get_or<Eigen::Index>("ambient_dim", cfg.ambient_dim);
  cfg.cluster_dim = r.get_or<Eigen::Index>("cluster_dim", cfg.cluster_dim);
  cfg.cluster_probs = r.get_or<std::vector<double>>("cluster_probs", cfg.cluster_probs);
  cfg.noise_sigma = r.get_or<double>("noise_sigma", cfg.noise_sigma);
  cfg.mean_box = r.get_or<double>("mean_box", cfg.mean_box);
  cfg.min_mean_separation = r.get_or<double>("min_mean_separation", cfg.min_mean_separation);
  cfg.blob_cov_scale = r.get_or<double>("blob_cov_scale", cfg.blob_cov_scale);
  cfg.seed = r.get_or<std::uint64_t>("seed", cfg.seed);
  for (const char* key : {"blob_means", "blob_covs"}) {
    if (!r.has(key)) continue;
    FieldReader sub(r.at(key), r.where(key));
    for (int c = 0; c < 2; ++c) {
      const std::string part = c == 0 ? "A" : "B";
      if (!sub.has(part)) continue;
      if (std::string(key) == "blob_means") {
        cfg.blob_means[c] = parse_vectors(sub.at(part), sub.where(part));
      } else {
        cfg.blob_covs[c] = parse_matrices(sub.at(part), sub.where(part));
      }
    }
    sub.reject_unknown();
  }
  if (r.has("segments")) {
    const json& segs = r.at("segments");
    if (!segs.is_array()) throw InvalidInput("scenario.segments: expected an array");
    cfg.segments.clear();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      FieldReader s(segs[i], "scenario.segments[" + std::to_string(i) + "]");
      Segment seg;
      seg.length = s.get<std::int64_t>("length");
      seg.partition = parse_partition(s.get_or<std::string>("partition", "A"));
      seg.drift = s.get_or<double>("drift", 0.0);
      s.reject_unknown();
      cfg.segments.push_back(seg);
    }
  }
  r.reject_unknown();
  cfg.validate();
  return cfg;
}

AlgorithmSpec parse_algorithm(const json& j, std::size_t index) {
  FieldReader r(j, "algorithms[" + std::to_string(index) + "]");
  AlgorithmSpec spec;
  const auto kind = r.get<std::string>("kind");
  if (kind == "rice_ocelad") {
    spec.kind = AlgorithmSpec::Kind::rice_ocelad;
  } else if (kind == "comid_fixed") {
    spec.kind = AlgorithmSpec::Kind::comid_fixed;
  } else if (kind == "saol_random") {
    spec.kind = AlgorithmSpec::Kind::saol_random;
  } else {
    throw InvalidInput(r.where("kind") + ": unknown algorithm kind \"" + kind + "\"");
  }
  spec.name = r.get_or<std::string>("name", kind);
  const char* rate_key = spec.kind == AlgorithmSpec::Kind::comid_fixed ? "eta" : "eta0";
  spec.eta = r.get<double>(rate_key);
  if (!(spec.eta > 0.0)) throw InvalidInput(r.where(rate_key) + ": must be positive");
  spec.base_length = r.get_or<std::int64_t>("I0", 1);
  if (spec.base_length < 1) throw InvalidInput(r.where("I0") + ": must be positive");
  spec.max_level = r.get_or<int>("max_level", kDefaultMaxLevel);
  if (spec.max_level < 0) throw InvalidInput(r.where("max_level") + ": must be nonnegative");
  spec.loss.lambda = r.get_or<double>("lambda", 0.0);
  if (!(spec.loss.lambda >= 0.0)) throw InvalidInput(r.where("lambda") + ": must be nonnegative");
  const auto reg = r.get_or<std::string>("regularizer", "nuclear");
  if (reg == "nuclear") {
    spec.loss.regularizer = Regularizer::nuclear;
  } else if (reg == "l1") {
    spec.loss.regularizer = Regularizer::elementwise_l1;
  } else {
    throw InvalidInput(r.where("regularizer") + ": expected \"nuclear\" or \"l1\"");
  }
  spec.seed = r.get_or<std::uint64_t>("seed", 0);
  r.reject_unknown();
  return spec;
}

}  // namespace

ExperimentFile parse_experiment(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config parse error: ") + e.what());
  }
  FieldReader r(root, "");
  ExperimentFile exp;
  exp.schema_version = r.get<int>("schema_version");
  if (exp.schema_version != kSchemaVersion) {
    throw InvalidInput("schema_version: unsupported version " + std::to_string(exp.schema_version));
  }
  exp.scenario = parse_scenario(r.at("scenario"));
  if (r.has("replay")) {
    FieldReader rp(r.at("replay"), "replay");
    ReplaySource src;
    src.stream_file = rp.get<std::string>("stream_file");
    src.dataset_file = rp.get<std::string>("dataset_file");
    src.labels = parse_partition(rp.get_or<std::string>("labels", "A"));
    rp.reject_unknown();
    exp.replay = src;
  }
  const json& algs = r.at("algorithms");
  if (!algs.is_array() || algs.empty()) throw InvalidInput("algorithms: expected a nonempty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < algs.size(); ++i) {
    exp.algorithms.push_back(parse_algorithm(algs[i], i));
    if (!names.insert(exp.algorithms.back().name).second) {
      throw InvalidInput("algorithms[" + std::to_string(i) + "].name: duplicate name \"" + exp.algorithms.back().name + "\"");
    }
  }
  exp.trials = r.get_or<int>("trials", 1);
  if (exp.trials < 1) throw InvalidInput("trials: must be >= 1");
  exp.eval_every = r.get_or<std::int64_t>("eval_every", 50);
  if (exp.eval_every < 1) throw InvalidInput("eval_every: must be >= 1");
  exp.knn_k = r.get_or<int>("knn_k", 5);
  if (exp.knn_k < 1) throw InvalidInput("knn_k: must be >= 1");
  exp.outputs = r.get_or<std::string>("outputs", "out");
  r.reject_unknown();
  return exp;
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_experiment(ss.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::uint64_t trial_seed(std::uint64_t master, int trial) { return master + static_cast<std::uint64_t>(trial); }

namespace {

constexpr std::uint64_t kComparatorStream = 5;

double comparator_loss(const Dataset& data, std::pair<std::int64_t, std::int64_t> pair, Partition p, int y,
                       Eigen::Index cluster_dim, const GroundTruthScale& scale) {
  // u^T (alpha D P D^T) u = alpha ||P (p_i - p_j)||^2 because u = D (p_i - p_j)
  const Eigen::Index offset = p == Partition::A ? 0 : cluster_dim;
  const double sq = (data.points.row(pair.first).segment(offset, cluster_dim) -
                     data.points.row(pair.second).segment(offset, cluster_dim))
                        .squaredNorm();
  return std::max(0.0, 1.0 - y * (scale.mu - scale.alpha * sq));
}

}  // namespace

TrialData make_trial(const ScenarioConfig& scenario, int trial, std::int64_t eval_every) {
  const std::uint64_t seed = trial_seed(scenario.seed, trial);
  TrialData out;
  Rng data_rng = make_rng(seed, SeedStream::dataset);
  out.dataset = generate_dataset(scenario, data_rng);

  Rng fit_rng(seed, kComparatorStream);
  const std::array<GroundTruthScale, 2> scale{
      fit_ground_truth_scale(out.dataset, Partition::A, scenario.cluster_dim, fit_rng),
      fit_ground_truth_scale(out.dataset, Partition::B, scenario.cluster_dim, fit_rng)};
  out.scales = scale;

  Rng stream_rng = make_rng(seed, SeedStream::stream);
  StreamGenerator gen(scenario, out.dataset, stream_rng);
  const auto T = static_cast<std::size_t>(scenario.horizon());
  out.stream.reserve(T);
  out.partitions.reserve(T);
  out.comparator_losses.reserve(T);
  out.comparator_steps.reserve(T);
  Matrix prev_star;
  while (!gen.done()) {
    Constraint c = gen.next();
    const Partition p = scenario.partition_at(c.t);
    Matrix star = ground_truth_metric(gen.rotation().D, p, scenario.cluster_dim, scale[p == Partition::A ? 0 : 1]).M;
    if (prev_star.size() != 0) out.comparator_steps.push_back((star - prev_star).norm());
    prev_star = std::move(star);
    out.comparator_losses.push_back(comparator_loss(out.dataset, gen.last_pair(), p, c.y, scenario.cluster_dim,
                                                    scale[p == Partition::A ? 0 : 1]));
    out.partitions.push_back(p);
    if (c.t % eval_every == 0) out.checkpoint_rotations.emplace_back(c.t, gen.rotation().D);
    out.stream.push_back(std::move(c));
  }
  if (!out.stream.empty()) out.comparator_steps.push_back(0.0);
  return out;
}

namespace {

TrialData make_replay_trial(const ReplaySource& src, std::int64_t eval_every) {
  TrialData out;
  {
    std::ifstream in(src.dataset_file);
    if (!in) throw InvalidInput("cannot read dataset file " + src.dataset_file.string());
    out.dataset = read_dataset_csv(in);
  }
  {
    std::ifstream in(src.stream_file);
    if (!in) throw InvalidInput("cannot read stream file " + src.stream_file.string());
    out.stream = read_stream(in);
  }
  if (out.stream.empty()) throw InvalidInput("replay stream is empty");
  const Eigen::Index n = out.stream.front().x.size();
  if (out.dataset.points.cols() != n) throw InvalidInput("replay dataset and stream differ in dimension");
  for (std::size_t i = 0; i < out.stream.size(); ++i) {
    if (out.stream[i].t != static_cast<std::int64_t>(i) + 1) throw InvalidInput("replay stream times must be 1, 2, ...");
  }
  out.partitions.assign(out.stream.size(), src.labels);
  out.comparator_losses.assign(out.stream.size(), 0.0);
  for (std::int64_t t = eval_every; t <= static_cast<std::int64_t>(out.stream.size()); t += eval_every) {
    out.checkpoint_rotations.emplace_back(t, Matrix::Identity(n, n));
  }
  return out;
}

}  // namespace

std::unique_ptr<OnlineMetricLearner> make_learner(const AlgorithmSpec& spec, Eigen::Index dim, int trial) {
  switch (spec.kind) {
    case AlgorithmSpec::Kind::rice_ocelad: {
      RiceConfig cfg{.eta0 = spec.eta, .base_length = spec.base_length, .max_level = spec.max_level};
      return std::make_unique<RiceOceladLearner>(dim, cfg, spec.loss);
    }
    case AlgorithmSpec::Kind::comid_fixed:
      return make_baseline({.kind = BaselineSpec::Kind::comid_fixed, .eta = spec.eta}, dim, spec.loss);
    case AlgorithmSpec::Kind::saol_random:
      return make_baseline({.kind = BaselineSpec::Kind::saol_random,
                            .eta = spec.eta,
                            .seed = spec.seed + static_cast<std::uint64_t>(trial),
                            .base_length = spec.base_length,
                            .max_level = spec.max_level},
                           dim, spec.loss);
  }
  throw LogicError("unhandled algorithm kind");
}

std::vector<MetricsRow> run_trial(const AlgorithmSpec& spec, const TrialData& data, const ScenarioConfig& scenario,
                                  int trial, int knn_k, std::size_t algorithm_index) {
  if (data.stream.empty()) return {};
  const Eigen::Index dim = data.stream.front().x.size();
  auto learner = make_learner(spec, dim, trial);
  const std::uint64_t seed = trial_seed(scenario.seed, trial);
  const int clusters = static_cast<int>(scenario.num_clusters());

  std::vector<MetricsRow> rows;
  auto checkpoint = data.checkpoint_rotations.begin();
  double window_loss = 0.0, regret = 0.0;
  std::int64_t window = 0;
  for (std::size_t i = 0; i < data.stream.size(); ++i) {
    const Constraint& c = data.stream[i];
    const MetricState estimate = learner->step(c);
    const double loss = margin_loss(estimate, c);
    window_loss += loss;
    ++window;
    regret += loss - data.comparator_losses[i];
    if (checkpoint == data.checkpoint_rotations.end() || checkpoint->first != c.t) continue;

    const Matrix rotated = data.dataset.points * checkpoint->second.transpose();
    const Matrix embedded = embed(estimate, rotated);
    const auto& labels = data.dataset.labels(data.partitions[i]);
    MetricsRow row;
    row.t = c.t;
    row.trial = trial;
    row.knn_error = knn_error(embedded, labels, knn_k);
    Rng km_rng(seed, (static_cast<std::uint64_t>(algorithm_index + 1) << 40) | static_cast<std::uint64_t>(c.t));
    row.nmi = kmeans_nmi(embedded, labels, clusters, km_rng).nmi;
    row.loss = window_loss / static_cast<double>(window);
    row.regret_cum = regret;
    rows.push_back(row);
    window_loss = 0.0;
    window = 0;
    ++checkpoint;
  }
  return rows;
}

unsigned worker_count() {
  if (const char* env = std::getenv("OCELAD_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<AlgorithmResult> run_experiment(const ExperimentFile& exp, unsigned threads) {
  const std::size_t n_alg = exp.algorithms.size();
  std::vector<std::vector<std::vector<MetricsRow>>> per_trial(static_cast<std::size_t>(exp.trials),
                                                              std::vector<std::vector<MetricsRow>>(n_alg));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (int trial = next++; trial < exp.trials; trial = next++) {
      try {
        const TrialData data = exp.replay ? make_replay_trial(*exp.replay, exp.eval_every)
                                          : make_trial(exp.scenario, trial, exp.eval_every);
        for (std::size_t a = 0; a < n_alg; ++a) {
          per_trial[trial][a] =
              run_trial(exp.algorithms[a], data, exp.scenario, trial, exp.knn_k, a);
        }
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = exp.trials;
      }
    }
  };
  threads = std::clamp(threads, 1u, static_cast<unsigned>(exp.trials));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<AlgorithmResult> out(n_alg);
  for (std::size_t a = 0; a < n_alg; ++a) {
    out[a].name = exp.algorithms[a].name;
    for (auto& trial_rows : per_trial) {
      out[a].rows.insert(out[a].rows.end(), trial_rows[a].begin(), trial_rows[a].end());
    }
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "t,trial,knn_error,nmi,loss,regret_cum\n";
  for (const MetricsRow& r : rows) {
    os << r.t << ',' << r.trial << ',' << format_double(r.knn_error) << ',' << format_double(r.nmi) << ','
       << format_double(r.loss) << ',' << format_double(r.regret_cum) << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("metrics CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,trial,knn_error,nmi,loss,regret_cum") throw InvalidInput("metrics CSV line 1: unexpected header");
  std::vector<MetricsRow> rows;
  std::int64_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = "metrics CSV line " + std::to_string(lineno);
    if (f.size() != 6) throw InvalidInput(where + ": expected 6 fields");
    MetricsRow r;
    r.t = parse_int(f[0], where);
    r.trial = static_cast<int>(parse_int(f[1], where));
    r.knn_error = parse_double(f[2], where);
    r.nmi = parse_double(f[3], where);
    r.loss = parse_double(f[4], where);
    r.regret_cum = parse_double(f[5], where);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ocelad
