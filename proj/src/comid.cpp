#include "ocelad/comid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ocelad/errors.hpp"

namespace ocelad {
namespace {

template <class EigenMap>
Matrix spectral_map(const Matrix& A, EigenMap&& f) {
  if (!A.allFinite()) throw NumericalError("non-finite matrix passed to proximal operator");
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Vector lam = es.eigenvalues().unaryExpr(f);
  const Matrix& U = es.eigenvectors();
  Matrix X = U * lam.asDiagonal() * U.transpose();
  // exact symmetry: (a + b) / 2 is order independent in IEEE arithmetic
  return 0.5 * (X + X.transpose());
}

}  // namespace

Matrix project_psd(const Matrix& A) {
  return spectral_map(A, [](double l) { return std::max(0.0, l); });
}

Matrix prox_nuclear_psd(const Matrix& A, double tau) {
  if (tau < 0.0) throw InvalidInput("prox threshold must be nonnegative");
  return spectral_map(A, [tau](double l) { return std::max(0.0, l - tau); });
}

Matrix prox_l1(const Matrix& A, double tau) {
  if (tau < 0.0) throw InvalidInput("prox threshold must be nonnegative");
  const Matrix S = A.unaryExpr([tau](double m) { return std::copysign(std::max(0.0, std::abs(m) - tau), m); });
  return project_psd(S);
}

MetricState comid_step(const MetricState& state, const Constraint& c, const ComidConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw InvalidInput("learning rate must be positive");
  if (!(cfg.norm_cap > 0.0)) throw InvalidInput("norm cap must be positive");
  if (cfg.loss.lambda < 0.0) throw InvalidInput("regularization weight must be nonnegative");

  const Subgradient g = margin_subgradient(state, c);
  const double tau = cfg.eta * cfg.loss.lambda;
  const bool active = g.gradMu != 0.0;

  MetricState next;
  if (!active && tau == 0.0) {
    next.M = state.M;
  } else {
    const Matrix step = active ? Matrix(state.M - cfg.eta * g.gradM) : state.M;
    next.M = cfg.loss.regularizer == Regularizer::nuclear ? prox_nuclear_psd(step, tau) : prox_l1(step, tau);
  }

  const double norm = operator_norm(next.M);
  if (norm > cfg.norm_cap) next.M *= cfg.norm_cap / norm;

  next.mu = std::max(1.0, state.mu - cfg.eta * g.gradMu);
  return next;
}

double static_regret(std::span<const double> losses_alg, std::span<const double> losses_best_fixed) {
  if (losses_alg.size() != losses_best_fixed.size()) throw InvalidInput("loss sequences differ in length");
  return std::accumulate(losses_alg.begin(), losses_alg.end(), 0.0) -
         std::accumulate(losses_best_fixed.begin(), losses_best_fixed.end(), 0.0);
}

}  // namespace ocelad
