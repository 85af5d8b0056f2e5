#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ocelad/dyadic.hpp"
#include "ocelad/metric.hpp"
#include "ocelad/random.hpp"
#include "ocelad/synthdata.hpp"

namespace ocelad {

/// Maps rows x to L x with M = L^T L, so Euclidean distance in the image is d_M.
Matrix embed(const MetricState& state, const Matrix& points);

/// Leave-one-out k-NN majority-vote error rate. Distance ties go to the lower
/// index, vote ties to the smallest label.
double knn_error(const Matrix& embedded, std::span<const int> labels, int k);

struct KMeansResult {
  std::vector<int> assignment;  // 0-based cluster ids
  Matrix centers;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
KMeansResult kmeans(const Matrix& points, int k, Rng& rng, int restarts = 10, int max_iter = 100);

/// I(A;B) / sqrt(H(A) H(B)), natural logs, 0/0 -> 0.
double nmi(std::span<const int> a, std::span<const int> b);

struct NmiResult {
  double nmi = 0.0;
  bool degenerate = false;  // all points coincide; nmi reported as 0
};

NmiResult kmeans_nmi(const Matrix& embedded, std::span<const int> true_labels, int k, Rng& rng);

/// Fraction of trials with NMI strictly above the threshold.
double nmi_exceedance(std::span<const double> trials, double threshold);

/// A closed time interval [q, s] of stream times (1-based).
struct TimeSpan {
  std::int64_t q = 1;
  std::int64_t s = 1;
  std::int64_t length() const { return s - q + 1; }
};

/// sum_{t in [q,s]} (alg_t - comparator_t); sequences are indexed from t = 1.
double dynamic_regret(std::span<const double> alg_losses, std::span<const double> comparator_losses, TimeSpan interval);

/// Sum of Frobenius norms of successive differences of M (mu excluded).
double path_length(std::span<const MetricState> states);

struct BoundConstants {
  double G_ell = 1.0;
  double phi_max = 1.0;
  double D_max = 1.0;
  double sigma = 1.0;
  double c = 1.0;

  /// Constants for the hinge loss under the Frobenius generator:
  /// G = max ||x - z||^2 + lambda, phi_max = c sqrt(n), D_max = 2 c sqrt(n).
  static BoundConstants for_hinge_frobenius(double max_pair_sq_dist, double lambda, double c, Eigen::Index n);
};

/// sqrt(T) ((D_max + 4 phi_max gamma) / eta0 + eta0 G^2 / (2 sigma)).
double corollary1_bound(const BoundConstants& k, double gamma, std::int64_t T, double eta0);

struct RegretReport {
  TimeSpan interval;
  double regret = 0.0;
  double path_length = 0.0;
  double bound_value = 0.0;
};

struct IntervalPartition {
  std::vector<DyadicInterval> left;   // I_{-k} .. I_0, lengths at least doubling
  std::vector<DyadicInterval> right;  // I_1 .. I_p, lengths at least halving from I_1 on
};

/// Splits [q, s] into consecutive members of the dyadic set with geometrically
/// growing then shrinking lengths.
IntervalPartition lemma5_partition(std::int64_t q, std::int64_t s, std::int64_t base_length);

/// Checks membership in the dyadic set, disjointness, consecutiveness, exact
/// cover of [q, s] and both length-ratio conditions. Integer arithmetic only.
bool lemma5_partition_valid(const IntervalPartition& part, std::int64_t q, std::int64_t s, std::int64_t base_length);

/// True iff `iv` is a member of the dyadic set with base length I0.
bool is_dyadic_member(const DyadicInterval& iv, std::int64_t base_length);

/// Ground-truth metric alpha * D P D^T, P projecting onto a clustering's
/// subspace, with margin threshold mu.
struct GroundTruthScale {
  double alpha = 1.0;
  double mu = 1.0;
};

/// Scale minimizing the mean hinge loss over `n_pairs` random pairs labeled by
/// `partition`.
GroundTruthScale fit_ground_truth_scale(const Dataset& data, Partition partition, Eigen::Index cluster_dim, Rng& rng,
                                        int n_pairs = 4000);

MetricState ground_truth_metric(const Matrix& rotation, Partition partition, Eigen::Index cluster_dim,
                                const GroundTruthScale& scale);

}  // namespace ocelad
