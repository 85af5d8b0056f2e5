#pragma once

#include <span>

#include "ocelad/metric.hpp"

namespace ocelad {

/// Bregman generator. Only the squared Frobenius norm is wired.
enum class BregmanGenerator { frobenius };

struct ComidConfig {
  double eta = 1.0;
  LossParams loss;
  double norm_cap = 1e6;
  BregmanGenerator psi = BregmanGenerator::frobenius;

  /// Default norm cap for dimension n (1e6 * n).
  static double default_norm_cap(Eigen::Index n) { return 1e6 * static_cast<double>(n); }
};

/// Euclidean projection of a symmetric matrix onto the PSD cone.
Matrix project_psd(const Matrix& A);

/// argmin_{X psd} 1/2 ||X - A||_F^2 + tau ||X||_*, by eigenvalue shrinkage.
Matrix prox_nuclear_psd(const Matrix& A, double tau);

/// Elementwise soft threshold followed by PSD projection.
Matrix prox_l1(const Matrix& A, double tau);

/// One composite mirror descent step on (M, mu). The input is not modified.
MetricState comid_step(const MetricState& state, const Constraint& c, const ComidConfig& cfg);

/// sum(alg) - sum(best_fixed).
double static_regret(std::span<const double> losses_alg, std::span<const double> losses_best_fixed);

}  // namespace ocelad
