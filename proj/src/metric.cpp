#include "ocelad/metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ocelad/errors.hpp"

namespace ocelad {

MetricState MetricState::identity(Eigen::Index n) { return {Matrix::Identity(n, n), 1.0}; }

MetricState MetricState::zero(Eigen::Index n) { return {Matrix::Zero(n, n), 1.0}; }

void validate_state(const MetricState& state) {
  const auto& M = state.M;
  if (M.rows() != M.cols() || M.rows() == 0) throw InvalidInput("metric matrix must be square and nonempty");
  if (!M.allFinite() || !std::isfinite(state.mu)) throw InvalidInput("metric state has non-finite entries");
  if ((M - M.transpose()).cwiseAbs().maxCoeff() != 0.0) throw InvalidInput("metric matrix is not symmetric");
  if (state.mu < 1.0) throw InvalidInput("margin threshold mu must be >= 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -kPsdSlack) throw InvalidInput("metric matrix is not PSD");
}

void validate_constraint(const Constraint& c, Eigen::Index dim) {
  if (c.x.size() != dim || c.z.size() != dim) {
    throw InvalidInput("constraint dimension " + std::to_string(c.x.size()) + "/" + std::to_string(c.z.size()) +
                       " does not match metric dimension " + std::to_string(dim));
  }
  if (c.y != 1 && c.y != -1) throw InvalidInput("constraint label must be +1 or -1");
}

double mahalanobis_sq(const MetricState& state, const Vector& x, const Vector& z) {
  if (x.size() != state.dim() || z.size() != state.dim()) throw InvalidInput("point dimension does not match metric");
  const Vector u = x - z;
  return std::max(0.0, u.dot(state.M * u));
}

double margin(const MetricState& state, const Constraint& c) {
  validate_constraint(c, state.dim());
  const Vector u = c.x - c.z;
  return c.y * (state.mu - u.dot(state.M * u));
}

double margin_loss(const MetricState& state, const Constraint& c) { return std::max(0.0, 1.0 - margin(state, c)); }

Subgradient margin_subgradient(const MetricState& state, const Constraint& c) {
  const auto n = state.dim();
  if (margin(state, c) >= 1.0) return {Matrix::Zero(n, n), 0.0};
  const Vector u = c.x - c.z;
  return {static_cast<double>(c.y) * (u * u.transpose()), -static_cast<double>(c.y)};
}

double regularizer_value(const Matrix& M, const LossParams& p) {
  if (p.regularizer == Regularizer::elementwise_l1) return M.cwiseAbs().sum();
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return es.eigenvalues().cwiseAbs().sum();
}

double operator_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MetricState lerp(const MetricState& a, const MetricState& b, double alpha) {
  return {alpha * a.M + (1.0 - alpha) * b.M, alpha * a.mu + (1.0 - alpha) * b.mu};
}

}  // namespace ocelad
