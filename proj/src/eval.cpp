#include "ocelad/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ocelad/errors.hpp"

namespace ocelad {

Matrix embed(const MetricState& state, const Matrix& points) {
  if (points.cols() != state.dim()) throw InvalidInput("point dimension does not match metric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(state.M);
  if (es.info() != Eigen::Success || !state.M.allFinite()) throw NumericalError("eigendecomposition failed");
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  // L = diag(root) U^T, image rows are (L x)^T = x^T U diag(root)
  return points * es.eigenvectors() * root.asDiagonal();
}

double knn_error(const Matrix& embedded, std::span<const int> labels, int k) {
  const Eigen::Index n = embedded.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw InvalidInput("label count does not match points");
  if (k < 1 || k >= n) throw InvalidInput("k must satisfy 1 <= k < number of points");

  const Vector sq = embedded.rowwise().squaredNorm();
  const Matrix gram = embedded * embedded.transpose();
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n - 1));
  std::map<int, int> votes;
  std::int64_t errors = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[m++] = {std::max(0.0, sq(i) + sq(j) - 2.0 * gram(i, j)), j};
    }
    // pair comparison breaks distance ties by index
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    votes.clear();
    for (int r = 0; r < k; ++r) ++votes[labels[static_cast<std::size_t>(dist[r].second)]];
    int best_label = 0, best_count = -1;
    for (const auto& [label, count] : votes) {  // ascending labels: ties keep the smallest
      if (count > best_count) {
        best_label = label;
        best_count = count;
      }
    }
    if (best_label != labels[static_cast<std::size_t>(i)]) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(n);
}

namespace {

KMeansResult lloyd_once(const Matrix& X, int k, Rng& rng, int max_iter) {
  const Eigen::Index n = X.rows();
  KMeansResult res;
  res.centers.resize(k, X.cols());
  // k-means++ seeding
  res.centers.row(0) = X.row(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));
  Vector d2 = (X.rowwise() - res.centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
    }
    res.centers.row(c) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - res.centers.row(c)).rowwise().squaredNorm());
  }

  res.assignment.assign(static_cast<std::size_t>(n), -1);
  Vector best(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int arg = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (X.row(i) - res.centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          arg = c;
        }
      }
      best(i) = bd;
      if (res.assignment[i] != arg) {
        res.assignment[i] = arg;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    Matrix sums = Matrix::Zero(k, X.cols());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(res.assignment[i]) += X.row(i);
      ++counts[res.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        res.centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      } else {
        // empty cluster: move it to the worst-served point
        Eigen::Index far = 0;
        best.maxCoeff(&far);
        res.centers.row(c) = X.row(far);
        best(far) = 0.0;
      }
    }
  }
  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) res.inertia += (X.row(i) - res.centers.row(res.assignment[i])).squaredNorm();
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, Rng& rng, int restarts, int max_iter) {
  if (k < 1 || k > points.rows()) throw InvalidInput("k-means needs 1 <= k <= number of points");
  if (restarts < 1) throw InvalidInput("k-means needs at least one restart");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult res = lloyd_once(points, k, rng, max_iter);
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InvalidInput("labelings differ in length");
  if (a.empty()) return 0.0;
  std::map<int, std::int64_t> ca, cb;
  std::map<std::pair<int, int>, std::int64_t> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++cab[{a[i], b[i]}];
  }
  const double n = static_cast<double>(a.size());
  auto entropy = [n](const std::map<int, std::int64_t>& c) {
    double h = 0.0;
    for (const auto& [label, k] : c) {
      if (k == static_cast<std::int64_t>(n)) return 0.0;
      const double q = static_cast<double>(k) / n;
      h -= q * std::log(q);
    }
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  double mi = 0.0;
  for (const auto& [key, k] : cab) {
    const double q = static_cast<double>(k) / n;
    mi += q * std::log(q * n * n / (static_cast<double>(ca[key.first]) * static_cast<double>(cb[key.second])));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

NmiResult kmeans_nmi(const Matrix& embedded, std::span<const int> true_labels, int k, Rng& rng) {
  if (k < 2) throw InvalidInput("k-means NMI needs k >= 2");
  if (static_cast<Eigen::Index>(true_labels.size()) != embedded.rows()) {
    throw InvalidInput("label count does not match points");
  }
  const bool identical =
      embedded.rows() == 0 || (embedded.rowwise() - embedded.row(0)).cwiseAbs().maxCoeff() == 0.0;
  if (identical) return {0.0, true};
  const KMeansResult km = kmeans(embedded, k, rng);
  return {nmi(km.assignment, true_labels), false};
}

double nmi_exceedance(std::span<const double> trials, double threshold) {
  if (trials.empty()) throw InvalidInput("no trials to summarize");
  const auto above = std::count_if(trials.begin(), trials.end(), [&](double v) { return v > threshold; });
  return static_cast<double>(above) / static_cast<double>(trials.size());
}

double dynamic_regret(std::span<const double> alg_losses, std::span<const double> comparator_losses,
                      TimeSpan interval) {
  if (alg_losses.size() != comparator_losses.size()) throw InvalidInput("loss sequences differ in length");
  if (interval.q < 1 || interval.s < interval.q || interval.s > static_cast<std::int64_t>(alg_losses.size())) {
    throw InvalidInput("loss sequences do not cover the interval");
  }
  double sum = 0.0;
  for (std::int64_t t = interval.q; t <= interval.s; ++t) sum += alg_losses[t - 1] - comparator_losses[t - 1];
  return sum;
}

double path_length(std::span<const MetricState> states) {
  double total = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) total += (states[i].M - states[i - 1].M).norm();
  return total;
}

BoundConstants BoundConstants::for_hinge_frobenius(double max_pair_sq_dist, double lambda, double c,
                                                   Eigen::Index n) {
  const double root_n = std::sqrt(static_cast<double>(n));
  return {max_pair_sq_dist + lambda, c * root_n, 2.0 * c * root_n, 1.0, c};
}

double corollary1_bound(const BoundConstants& k, double gamma, std::int64_t T, double eta0) {
  if (T < 1 || !(eta0 > 0.0) || !(k.sigma > 0.0)) throw InvalidInput("bound needs T >= 1, eta0 > 0, sigma > 0");
  return std::sqrt(static_cast<double>(T)) *
         ((k.D_max + 4.0 * k.phi_max * gamma) / eta0 + eta0 * k.G_ell * k.G_ell / (2.0 * k.sigma));
}

bool is_dyadic_member(const DyadicInterval& iv, std::int64_t base_length) {
  if (iv.level < 0 || iv.level > 62) return false;
  const std::int64_t len = base_length << iv.level;
  return iv.length() == len && iv.start >= len && iv.start % len == 0;
}

IntervalPartition lemma5_partition(std::int64_t q, std::int64_t s, std::int64_t base_length) {
  if (base_length < 1) throw InvalidInput("base interval length must be positive");
  if (q < base_length) throw InvalidInput("interval must start at or after the base length");
  if (s < q) throw InvalidInput("interval end precedes its start");
  if (q % base_length != 0 || (s + 1) % base_length != 0) {
    throw InvalidInput("interval endpoints must align with the base length");
  }
  // work in units of base blocks, then scale back
  const std::int64_t first = q / base_length, last = (s + 1) / base_length - 1;
  std::vector<DyadicInterval> seq;
  for (std::int64_t p = first; p <= last;) {
    int j = std::countr_zero(static_cast<std::uint64_t>(p));
    while ((std::int64_t{1} << j) > last - p + 1) --j;
    const std::int64_t len = std::int64_t{1} << j;
    seq.push_back({j, p * base_length, (p + len) * base_length - 1});
    p += len;
  }
  IntervalPartition part;
  std::size_t split = 1;
  while (split < seq.size() && seq[split].length() >= 2 * seq[split - 1].length()) ++split;
  part.left.assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(split));
  part.right.assign(seq.begin() + static_cast<std::ptrdiff_t>(split), seq.end());
  return part;
}

bool lemma5_partition_valid(const IntervalPartition& part, std::int64_t q, std::int64_t s, std::int64_t base_length) {
  if (part.left.empty()) return false;
  std::vector<DyadicInterval> all(part.left);
  all.insert(all.end(), part.right.begin(), part.right.end());
  std::int64_t next = q;
  for (const DyadicInterval& iv : all) {
    if (!is_dyadic_member(iv, base_length) || iv.start != next) return false;
    next = iv.end + 1;
  }
  if (next != s + 1) return false;
  // |I_{-i}| / |I_{-i+1}| <= 1/2 for i >= 1
  for (std::size_t i = 1; i < part.left.size(); ++i) {
    if (2 * part.left[i - 1].length() > part.left[i].length()) return false;
  }
  // |I_i| / |I_{i-1}| <= 1/2 for i >= 2
  for (std::size_t i = 1; i < part.right.size(); ++i) {
    if (2 * part.right[i].length() > part.right[i - 1].length()) return false;
  }
  return true;
}

namespace {

struct ProjectedPair {
  double sq;  // squared distance inside the clustering subspace
  int y;
};

double mean_hinge(const std::vector<ProjectedPair>& pairs, double alpha, double mu) {
  double total = 0.0;
  for (const ProjectedPair& p : pairs) total += std::max(0.0, 1.0 - p.y * (mu - alpha * p.sq));
  return total / static_cast<double>(pairs.size());
}

template <class F>
double golden_min(F&& f, double lo, double hi, int iters, double* arg) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  *arg = fc <= fd ? c : d;
  return std::min(fc, fd);
}

}  // namespace

GroundTruthScale fit_ground_truth_scale(const Dataset& data, Partition partition, Eigen::Index cluster_dim, Rng& rng,
                                        int n_pairs) {
  if (data.size() < 2) throw InvalidInput("dataset too small to fit a ground-truth scale");
  const Eigen::Index offset = partition == Partition::A ? 0 : cluster_dim;
  const auto& labels = data.labels(partition);
  std::vector<ProjectedPair> pairs;
  double max_sq = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    const auto n = static_cast<std::uint64_t>(data.size());
    const auto i = static_cast<Eigen::Index>(rng.index(n));
    auto j = static_cast<Eigen::Index>(rng.index(n - 1));
    if (j >= i) ++j;
    const double sq = (data.points.row(i).segment(offset, cluster_dim) - data.points.row(j).segment(offset, cluster_dim))
                          .squaredNorm();
    max_sq = std::max(max_sq, sq);
    pairs.push_back({sq, labels[i] == labels[j] ? 1 : -1});
  }
  // the objective is jointly convex, so its partial minimum over mu is convex in alpha
  const double mu_hi = 4.0 + 2.0 * max_sq;
  auto best_mu = [&](double alpha, double* mu) {
    return golden_min([&](double m) { return mean_hinge(pairs, alpha, m); }, 1.0, mu_hi, 80, mu);
  };
  double alpha = 1.0;
  golden_min([&](double a) { double m; return best_mu(a, &m); }, 0.0, 10.0, 80, &alpha);
  GroundTruthScale out;
  out.alpha = alpha;
  best_mu(alpha, &out.mu);
  return out;
}

MetricState ground_truth_metric(const Matrix& rotation, Partition partition, Eigen::Index cluster_dim,
                                const GroundTruthScale& scale) {
  const Eigen::Index offset = partition == Partition::A ? 0 : cluster_dim;
  const Matrix basis = rotation.middleCols(offset, cluster_dim);
  Matrix M = scale.alpha * basis * basis.transpose();
  M = 0.5 * (M + M.transpose());
  return {std::move(M), scale.mu};
}

}  // namespace ocelad
