#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocelad/metric.hpp"
#include "ocelad/random.hpp"

namespace ocelad {

enum class Partition { A, B };

const char* to_string(Partition p);
Partition parse_partition(const std::string& s);

/// Piecewise-constant stretch of the schedule.
struct Segment {
  std::int64_t length = 0;
  Partition partition = Partition::A;
  double drift = 0.0;  // rotation step size per tick
};

struct ScenarioConfig {
  std::int64_t n_points = 2000;
  Eigen::Index ambient_dim = 25;
  Eigen::Index cluster_dim = 3;
  std::vector<double> cluster_probs{0.5, 0.3, 0.2};
  double noise_sigma = 1.0;
  /// Blob parameters per clustering (index 0 = A, 1 = B). When empty they are
  /// drawn from the seed: means uniform in [-mean_box, mean_box]^cluster_dim with
  /// pairwise distance >= min_mean_separation, covariances blob_cov_scale * I.
  std::array<std::vector<Vector>, 2> blob_means;
  std::array<std::vector<Matrix>, 2> blob_covs;
  double mean_box = 3.0;
  double min_mean_separation = 3.0;
  double blob_cov_scale = 0.5;
  std::vector<Segment> segments;
  std::uint64_t seed = 0;

  std::int64_t horizon() const;
  std::size_t num_clusters() const { return cluster_probs.size(); }
  /// Segment active at stream time t (1-based).
  const Segment& segment_at(std::int64_t t) const;
  Partition partition_at(std::int64_t t) const { return segment_at(t).partition; }
  double drift_at(std::int64_t t) const { return segment_at(t).drift; }
  /// Times t at which the partition differs from that at t - 1.
  std::vector<std::int64_t> switch_times() const;
  /// Throws InvalidInput naming the offending field.
  void validate() const;
  ScenarioConfig with_seed(std::uint64_t s) const;
};

/// Six-segment nonstationary schedule: static A, static B, moderate / fast /
/// moderate drift on B, slow drift back on A. Segment lengths and drift rates
/// are calibration choices.
ScenarioConfig paper_fig_preset();
/// Desk-scale variant: 10 dims, 400 points, T = 4000.
ScenarioConfig scaled_paper_fig_preset();
std::optional<ScenarioConfig> preset_by_name(const std::string& name);

struct Dataset {
  Matrix points;  // n_points x ambient_dim
  std::vector<int> labels_a;  // 1-based
  std::vector<int> labels_b;
  std::array<std::vector<Vector>, 2> blob_means;

  const std::vector<int>& labels(Partition p) const { return p == Partition::A ? labels_a : labels_b; }
  std::int64_t size() const { return points.rows(); }
};

struct RotationState {
  Matrix D;
};

Dataset generate_dataset(const ScenarioConfig& cfg, Rng& rng);

/// Haar-uniform orthogonal matrix.
RotationState rotation_init(Eigen::Index dim, Rng& rng);
/// D exp(eps A) for a random skew-symmetric A with ||A||_F = 1.
RotationState rotation_step(const RotationState& state, double eps, Rng& rng);
/// Nearest orthogonal matrix (polar factor).
void reorthonormalize(RotationState& state);
double orthogonality_defect(const RotationState& state);

/// Produces the labeled constraint stream one step at a time.
class StreamGenerator {
 public:
  StreamGenerator(const ScenarioConfig& cfg, const Dataset& data, Rng& rng);

  bool done() const { return t_ >= cfg_.horizon(); }
  Constraint next();
  std::int64_t t() const { return t_; }
  const RotationState& rotation() const { return rotation_; }
  /// Dataset indices of the most recent pair.
  std::pair<std::int64_t, std::int64_t> last_pair() const { return last_pair_; }

 private:
  const ScenarioConfig& cfg_;
  const Dataset& data_;
  Rng& rng_;
  RotationState rotation_;
  std::int64_t t_ = 0;
  std::pair<std::int64_t, std::int64_t> last_pair_{0, 0};
};

std::vector<Constraint> constraint_stream(const ScenarioConfig& cfg, const Dataset& data, Rng& rng);

/// Seeds for the independent random streams of one scenario instance.
enum class SeedStream : std::uint64_t { dataset = 1, stream = 2, evaluation = 3, learner = 4 };
inline Rng make_rng(std::uint64_t seed, SeedStream s) { return Rng(seed, static_cast<std::uint64_t>(s)); }

// Interchange formats.
void write_stream(std::ostream& os, const std::vector<Constraint>& stream);
std::vector<Constraint> read_stream(std::istream& is);
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

}  // namespace ocelad
