#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace ocelad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical slack for PSD eigenvalue checks.
inline constexpr double kPsdSlack = 1e-10;

/// A Mahalanobis metric (x-z)^T M (x-z) together with its margin threshold mu.
struct MetricState {
  Matrix M;
  double mu = 1.0;

  /// Identity metric with mu = 1, i.e. plain squared Euclidean distance.
  static MetricState identity(Eigen::Index n);
  static MetricState zero(Eigen::Index n);

  Eigen::Index dim() const { return M.rows(); }
};

/// One streamed similarity/dissimilarity label on a pair of points.
struct Constraint {
  Vector x;
  Vector z;
  int y = 1;  // +1 similar, -1 dissimilar
  std::int64_t t = 0;
};

enum class Regularizer { nuclear, elementwise_l1 };

struct LossParams {
  double lambda = 0.0;
  Regularizer regularizer = Regularizer::nuclear;
};

struct Subgradient {
  Matrix gradM;
  double gradMu = 0.0;
};

/// Throws InvalidInput unless M is square, symmetric, PSD (up to kPsdSlack)
/// and mu >= 1.
void validate_state(const MetricState& state);
/// Throws InvalidInput on mismatched dimensions or y outside {+1, -1}.
void validate_constraint(const Constraint& c, Eigen::Index dim);

/// Squared Mahalanobis distance, clamped at zero.
double mahalanobis_sq(const MetricState& state, const Vector& x, const Vector& z);

/// The signed margin y (mu - u^T M u), u = x - z.
double margin(const MetricState& state, const Constraint& c);

/// Hinge loss max(0, 1 - margin). Excludes the regularizer term.
double margin_loss(const MetricState& state, const Constraint& c);

/// Subgradient of margin_loss in (M, mu). Zero on and beyond the kink.
Subgradient margin_subgradient(const MetricState& state, const Constraint& c);

/// Nuclear norm (sum of |eigenvalues| for symmetric M) or sum |M_ij|.
double regularizer_value(const Matrix& M, const LossParams& p);

/// Largest absolute eigenvalue of a symmetric matrix.
double operator_norm(const Matrix& M);

/// alpha * a + (1 - alpha) * b.
MetricState lerp(const MetricState& a, const MetricState& b, double alpha);

}  // namespace ocelad
