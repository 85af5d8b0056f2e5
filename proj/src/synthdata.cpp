#include "ocelad/synthdata.hpp"

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ocelad/errors.hpp"
#include "ocelad/textio.hpp"

namespace ocelad {

const char* to_string(Partition p) { return p == Partition::A ? "A" : "B"; }

Partition parse_partition(const std::string& s) {
  if (s == "A" || s == "a") return Partition::A;
  if (s == "B" || s == "b") return Partition::B;
  throw InvalidInput("partition must be \"A\" or \"B\", got \"" + s + "\"");
}

std::int64_t ScenarioConfig::horizon() const {
  std::int64_t total = 0;
  for (const Segment& s : segments) total += s.length;
  return total;
}

const Segment& ScenarioConfig::segment_at(std::int64_t t) const {
  if (t < 1) throw InvalidInput("schedule time must be >= 1");
  std::int64_t end = 0;
  for (const Segment& s : segments) {
    end += s.length;
    if (t <= end) return s;
  }
  throw InvalidInput("schedule time " + std::to_string(t) + " is past the horizon");
}

std::vector<std::int64_t> ScenarioConfig::switch_times() const {
  std::vector<std::int64_t> out;
  std::int64_t t = 1;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0 && segments[i].partition != segments[i - 1].partition) out.push_back(t);
    t += segments[i].length;
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (n_points < 2) throw InvalidInput("n_points: need at least 2 points");
  if (cluster_dim < 1) throw InvalidInput("cluster_dim: must be positive");
  if (ambient_dim < 2 * cluster_dim) throw InvalidInput("ambient_dim: must be at least 2 * cluster_dim");
  if (cluster_probs.empty()) throw InvalidInput("cluster_probs: must be nonempty");
  double sum = 0.0;
  for (double p : cluster_probs) {
    if (!(p >= 0.0)) throw InvalidInput("cluster_probs: entries must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("cluster_probs: must sum to 1 (sum is " + std::to_string(sum) + ")");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("noise_sigma: must be nonnegative");
  if (!(blob_cov_scale >= 0.0)) throw InvalidInput("blob_cov_scale: must be nonnegative");
  if (!(mean_box > 0.0)) throw InvalidInput("mean_box: must be positive");
  if (!(min_mean_separation >= 0.0)) throw InvalidInput("min_mean_separation: must be nonnegative");
  if (segments.empty()) throw InvalidInput("segments: schedule must cover at least one step");
  for (const Segment& s : segments) {
    if (s.length < 1) throw InvalidInput("segments: lengths must be positive");
    if (!(s.drift >= 0.0) || !std::isfinite(s.drift)) throw InvalidInput("segments: drift must be finite and >= 0");
  }
  for (int c = 0; c < 2; ++c) {
    const char* field = c == 0 ? "blob_means.A" : "blob_means.B";
    if (!blob_means[c].empty()) {
      if (blob_means[c].size() != num_clusters()) throw InvalidInput(std::string(field) + ": one mean per cluster");
      for (const Vector& m : blob_means[c]) {
        if (m.size() != cluster_dim) throw InvalidInput(std::string(field) + ": means must have cluster_dim entries");
      }
    }
    if (!blob_covs[c].empty()) {
      if (blob_covs[c].size() != num_clusters()) throw InvalidInput("blob_covs: one covariance per cluster");
      for (const Matrix& S : blob_covs[c]) {
        if (S.rows() != cluster_dim || S.cols() != cluster_dim) throw InvalidInput("blob_covs: wrong shape");
      }
    }
  }
}

ScenarioConfig ScenarioConfig::with_seed(std::uint64_t s) const {
  ScenarioConfig out = *this;
  out.seed = s;
  return out;
}

ScenarioConfig paper_fig_preset() {
  ScenarioConfig cfg;
  cfg.segments = {
      {1000, Partition::A, 0.0},  {1000, Partition::B, 0.0},  {1500, Partition::B, 5e-3},
      {1500, Partition::B, 2e-2}, {1500, Partition::B, 5e-3}, {1500, Partition::A, 2e-3},
  };
  return cfg;
}

ScenarioConfig scaled_paper_fig_preset() {
  ScenarioConfig cfg = paper_fig_preset();
  cfg.n_points = 400;
  cfg.ambient_dim = 10;
  cfg.noise_sigma = 2.0;
  for (Segment& s : cfg.segments) s.length /= 2;
  return cfg;
}

std::optional<ScenarioConfig> preset_by_name(const std::string& name) {
  if (name == "paper-fig") return paper_fig_preset();
  if (name == "paper-fig-scaled") return scaled_paper_fig_preset();
  return std::nullopt;
}

namespace {

std::vector<Vector> draw_means(const ScenarioConfig& cfg, Rng& rng) {
  const std::size_t k = cfg.num_clusters();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<Vector> means;
    for (std::size_t i = 0; i < k; ++i) {
      Vector m(cfg.cluster_dim);
      for (Eigen::Index d = 0; d < cfg.cluster_dim; ++d) m(d) = rng.uniform(-cfg.mean_box, cfg.mean_box);
      means.push_back(std::move(m));
    }
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      for (std::size_t j = i + 1; j < k && ok; ++j) ok = (means[i] - means[j]).norm() >= cfg.min_mean_separation;
    }
    if (ok) return means;
  }
  throw InvalidInput("min_mean_separation: cannot place blob means that far apart inside mean_box");
}

std::size_t draw_label(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix G(rows, cols);
  // column-major fill order is part of the determinism contract
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = rng.normal();
  return G;
}

}  // namespace

Dataset generate_dataset(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  const Eigen::Index cd = cfg.cluster_dim;
  Dataset data;
  std::array<std::vector<Matrix>, 2> chol;
  for (int c = 0; c < 2; ++c) {
    data.blob_means[c] = cfg.blob_means[c].empty() ? draw_means(cfg, rng) : cfg.blob_means[c];
    for (std::size_t k = 0; k < cfg.num_clusters(); ++k) {
      const Matrix S = cfg.blob_covs[c].empty() ? Matrix(cfg.blob_cov_scale * Matrix::Identity(cd, cd))
                                                : cfg.blob_covs[c][k];
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -kPsdSlack) {
        throw InvalidInput("blob_covs: covariance is not PSD");
      }
      // symmetric square-root factor; tolerates singular covariances
      chol[c].push_back(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal());
    }
  }

  data.points.resize(cfg.n_points, cfg.ambient_dim);
  data.labels_a.resize(static_cast<std::size_t>(cfg.n_points));
  data.labels_b.resize(static_cast<std::size_t>(cfg.n_points));
  for (std::int64_t p = 0; p < cfg.n_points; ++p) {
    const std::size_t i = draw_label(cfg.cluster_probs, rng);
    const std::size_t j = draw_label(cfg.cluster_probs, rng);
    data.labels_a[p] = static_cast<int>(i) + 1;
    data.labels_b[p] = static_cast<int>(j) + 1;
    Vector e(cd);
    for (Eigen::Index d = 0; d < cd; ++d) e(d) = rng.normal();
    data.points.row(p).segment(0, cd) = (data.blob_means[0][i] + chol[0][i] * e).transpose();
    for (Eigen::Index d = 0; d < cd; ++d) e(d) = rng.normal();
    data.points.row(p).segment(cd, cd) = (data.blob_means[1][j] + chol[1][j] * e).transpose();
    for (Eigen::Index d = 2 * cd; d < cfg.ambient_dim; ++d) data.points(p, d) = cfg.noise_sigma * rng.normal();
  }
  return data;
}

RotationState rotation_init(Eigen::Index dim, Rng& rng) {
  if (dim < 1) throw InvalidInput("rotation dimension must be positive");
  const Matrix G = gaussian_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  // sign correction makes the distribution Haar
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return {std::move(Q)};
}

RotationState rotation_step(const RotationState& state, double eps, Rng& rng) {
  if (!(eps >= 0.0)) throw InvalidInput("rotation step size must be nonnegative");
  if (eps == 0.0) return state;
  const Eigen::Index n = state.D.rows();
  const Matrix G = gaussian_matrix(n, n, rng);
  Matrix A = G - G.transpose();
  const double norm = A.norm();
  if (norm == 0.0) return state;
  A /= norm;

  // exp of a skew-symmetric matrix through the Hermitian matrix iA
  using CMatrix = Eigen::MatrixXcd;
  const CMatrix H = std::complex<double>(0.0, 1.0) * A.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in rotation step");
  Eigen::VectorXcd phase(n);
  for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::polar(1.0, -eps * es.eigenvalues()(k));
  const CMatrix& V = es.eigenvectors();
  const Matrix expA = (V * phase.asDiagonal() * V.adjoint()).real();
  return {state.D * expA};
}

void reorthonormalize(RotationState& state) {
  Eigen::JacobiSVD<Matrix> svd(state.D, Eigen::ComputeFullU | Eigen::ComputeFullV);
  state.D = svd.matrixU() * svd.matrixV().transpose();
}

double orthogonality_defect(const RotationState& state) {
  const auto n = state.D.rows();
  return (state.D.transpose() * state.D - Matrix::Identity(n, n)).norm();
}

StreamGenerator::StreamGenerator(const ScenarioConfig& cfg, const Dataset& data, Rng& rng)
    : cfg_(cfg), data_(data), rng_(rng) {
  cfg_.validate();
  if (data_.points.cols() != cfg_.ambient_dim || data_.size() < 2) {
    throw InvalidInput("dataset does not match scenario dimensions");
  }
  rotation_ = rotation_init(cfg_.ambient_dim, rng_);
}

Constraint StreamGenerator::next() {
  if (done()) throw InvalidInput("stream exhausted");
  ++t_;
  const Segment& seg = cfg_.segment_at(t_);
  rotation_ = rotation_step(rotation_, seg.drift, rng_);
  if (t_ % 1000 == 0 || orthogonality_defect(rotation_) > 1e-10) reorthonormalize(rotation_);

  const auto n = static_cast<std::uint64_t>(data_.size());
  const auto i = static_cast<std::int64_t>(rng_.index(n));
  auto j = static_cast<std::int64_t>(rng_.index(n - 1));
  if (j >= i) ++j;
  last_pair_ = {i, j};

  const auto& labels = data_.labels(seg.partition);
  Constraint c;
  c.t = t_;
  c.x = rotation_.D * data_.points.row(i).transpose();
  c.z = rotation_.D * data_.points.row(j).transpose();
  c.y = labels[i] == labels[j] ? 1 : -1;
  return c;
}

std::vector<Constraint> constraint_stream(const ScenarioConfig& cfg, const Dataset& data, Rng& rng) {
  StreamGenerator gen(cfg, data, rng);
  std::vector<Constraint> out;
  out.reserve(static_cast<std::size_t>(cfg.horizon()));
  while (!gen.done()) out.push_back(gen.next());
  return out;
}

void write_stream(std::ostream& os, const std::vector<Constraint>& stream) {
  const Eigen::Index n = stream.empty() ? 0 : stream.front().x.size();
  os << "n=" << n << " T=" << stream.size() << '\n';
  std::string line;
  for (const Constraint& c : stream) {
    line.clear();
    line += std::to_string(c.t);
    line += ',';
    line += std::to_string(c.y);
    for (Eigen::Index k = 0; k < n; ++k) (line += ',') += format_double(c.x(k));
    for (Eigen::Index k = 0; k < n; ++k) (line += ',') += format_double(c.z(k));
    os << line << '\n';
  }
}

std::vector<Constraint> read_stream(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("stream file: missing header");
  long long n = -1, T = -1;
  if (std::sscanf(line.c_str(), "n=%lld T=%lld", &n, &T) != 2 || n < 0 || T < 0) {
    throw InvalidInput("stream file line 1: expected header 'n=<dim> T=<horizon>'");
  }
  std::vector<Constraint> out;
  out.reserve(static_cast<std::size_t>(T));
  std::int64_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(2 + 2 * n)) {
      throw InvalidInput("stream file line " + std::to_string(lineno) + ": expected " + std::to_string(2 + 2 * n) +
                         " fields, got " + std::to_string(fields.size()));
    }
    const std::string where = "stream file line " + std::to_string(lineno);
    Constraint c;
    c.t = parse_int(fields[0], where);
    c.y = static_cast<int>(parse_int(fields[1], where));
    if (c.y != 1 && c.y != -1) throw InvalidInput(where + ": label must be +1 or -1");
    c.x.resize(n);
    c.z.resize(n);
    for (long long k = 0; k < n; ++k) {
      c.x(k) = parse_double(fields[2 + k], where);
      c.z(k) = parse_double(fields[2 + n + k], where);
    }
    out.push_back(std::move(c));
  }
  if (static_cast<long long>(out.size()) != T) {
    throw InvalidInput("stream file: header declares T=" + std::to_string(T) + " but found " +
                       std::to_string(out.size()) + " constraints");
  }
  return out;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  const Eigen::Index n = data.points.cols();
  os << "idx,label_a,label_b";
  for (Eigen::Index k = 1; k <= n; ++k) os << ",coord_" << k;
  os << '\n';
  std::string line;
  for (std::int64_t p = 0; p < data.size(); ++p) {
    line = std::to_string(p) + ',' + std::to_string(data.labels_a[p]) + ',' + std::to_string(data.labels_b[p]);
    for (Eigen::Index k = 0; k < n; ++k) (line += ',') += format_double(data.points(p, k));
    os << line << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("dataset CSV: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "idx" || header[1] != "label_a" || header[2] != "label_b") {
    throw InvalidInput("dataset CSV line 1: expected header idx,label_a,label_b,coord_1..coord_n");
  }
  const std::size_t n = header.size() - 3;
  std::vector<std::vector<double>> rows;
  Dataset data;
  std::int64_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "dataset CSV line " + std::to_string(lineno);
    if (fields.size() != n + 3) throw InvalidInput(where + ": wrong number of fields");
    data.labels_a.push_back(static_cast<int>(parse_int(fields[1], where)));
    data.labels_b.push_back(static_cast<int>(parse_int(fields[2], where)));
    std::vector<double> row(n);
    for (std::size_t k = 0; k < n; ++k) row[k] = parse_double(fields[3 + k], where);
    rows.push_back(std::move(row));
  }
  data.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  for (std::size_t p = 0; p < rows.size(); ++p)
    for (std::size_t k = 0; k < n; ++k) data.points(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = rows[p][k];
  return data;
}

}  // namespace ocelad
