#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ocelad/baselines.hpp"
#include "ocelad/eval.hpp"
#include "ocelad/synthdata.hpp"

namespace ocelad {

inline constexpr int kSchemaVersion = 1;

struct AlgorithmSpec {
  enum class Kind { rice_ocelad, comid_fixed, saol_random };
  std::string name;
  Kind kind = Kind::rice_ocelad;
  double eta = 0.1;  // eta0 for the ensembles, the constant rate for comid_fixed
  std::int64_t base_length = 1;
  int max_level = kDefaultMaxLevel;
  LossParams loss;
  std::uint64_t seed = 0;  // selection seed for saol_random (offset by trial index)
};

/// Replays an externally prepared stream instead of generating one.
struct ReplaySource {
  std::filesystem::path stream_file;
  std::filesystem::path dataset_file;
  Partition labels = Partition::A;
};

struct ExperimentFile {
  int schema_version = kSchemaVersion;
  ScenarioConfig scenario;
  std::vector<AlgorithmSpec> algorithms;
  int trials = 1;
  std::int64_t eval_every = 50;
  int knn_k = 5;
  std::filesystem::path outputs = "out";
  std::optional<ReplaySource> replay;
};

/// Parses the JSON experiment description. Errors name the offending field.
ExperimentFile parse_experiment(const std::string& text);
ExperimentFile load_experiment(const std::filesystem::path& path);

struct MetricsRow {
  std::int64_t t = 0;
  int trial = 0;
  double knn_error = 0.0;
  double nmi = 0.0;
  double loss = 0.0;        // mean loss of the estimate since the previous checkpoint
  double regret_cum = 0.0;  // cumulative loss minus ground-truth comparator loss
};

struct AlgorithmResult {
  std::string name;
  std::vector<MetricsRow> rows;  // trial-major, time-ordered
};

/// Instance of a scenario for one trial: dataset, stream, and what evaluation needs.
struct TrialData {
  Dataset dataset;
  std::vector<Constraint> stream;
  std::vector<Partition> partitions;          // active partition per step
  std::vector<double> comparator_losses;      // ground-truth loss per step
  std::vector<std::pair<std::int64_t, Matrix>> checkpoint_rotations;  // (t, D_t)
  std::array<GroundTruthScale, 2> scales{};   // comparator scale for A, B
  /// ||M*_{t+1} - M*_t||_F at index t - 1 (last entry 0); empty for replays.
  std::vector<double> comparator_steps;
};

std::uint64_t trial_seed(std::uint64_t master, int trial);

TrialData make_trial(const ScenarioConfig& scenario, int trial, std::int64_t eval_every);

std::unique_ptr<OnlineMetricLearner> make_learner(const AlgorithmSpec& spec, Eigen::Index dim, int trial);

/// Runs one algorithm on one trial and evaluates every eval_every steps.
std::vector<MetricsRow> run_trial(const AlgorithmSpec& spec, const TrialData& data, const ScenarioConfig& scenario,
                                  int trial, int knn_k, std::size_t algorithm_index);

/// Worker count from OCELAD_THREADS (default: hardware concurrency).
unsigned worker_count();

/// All algorithms over all trials; trials run on `threads` workers and are
/// merged in trial order.
std::vector<AlgorithmResult> run_experiment(const ExperimentFile& exp, unsigned threads);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& is);

}  // namespace ocelad
