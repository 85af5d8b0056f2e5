#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ocelad/comid.hpp"
#include "ocelad/errors.hpp"
#include "oracles.hpp"

using namespace ocelad;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i, i) = x, ++i;
  return out;
}

Constraint random_constraint(int n, Rng& rng, double scale = 1.0) {
  Constraint c;
  c.x = oracle::random_vector(n, rng, scale);
  c.z = oracle::random_vector(n, rng, scale);
  c.y = rng.uniform() < 0.5 ? 1 : -1;
  return c;
}

double prox_objective(const Matrix& X, const Matrix& A, double tau) {
  const double d = oracle::frob_dist(X, A);
  return 0.5 * d * d + tau * oracle::nuclear_norm(X);
}

}  // namespace

TEST_CASE("prox_nuclear_psd examples") {
  CHECK(oracle::frob_dist(prox_nuclear_psd(diag({1, 2}), 0.0), diag({1, 2})) < 1e-14);
  CHECK(oracle::frob_dist(prox_nuclear_psd(diag({3, 1}), 2.0), diag({1, 0})) < 1e-14);
  CHECK(oracle::frob_dist(prox_nuclear_psd(diag({-1, 2}), 0.5), diag({0, 1.5})) < 1e-14);
}

TEST_CASE("prox_nuclear_psd agrees with the numerical minimizer") {
  Rng rng(31, 0);
  for (int i = 0; i < 30; ++i) {
    const Matrix A = oracle::random_symmetric(3, rng);
    const double tau = 0.5 * rng.uniform();
    CHECK(oracle::frob_dist(prox_nuclear_psd(A, tau), oracle::prox_nuclear_psd_numeric(A, tau)) < 1e-7);
  }
}

TEST_CASE("prox_nuclear_psd rejects non-finite input") {
  Matrix A = Matrix::Identity(2, 2);
  A(0, 0) = std::nan("");
  CHECK_THROWS_AS(prox_nuclear_psd(A, 0.1), NumericalError);
}

TEST_CASE("prox_l1 examples") {
  Rng rng(2, 0);
  const Matrix A = oracle::random_symmetric(3, rng);
  CHECK(oracle::frob_dist(prox_l1(A, 0.0), oracle::psd_projection(A)) < 1e-12);
  CHECK(oracle::frob_dist(prox_l1(diag({3, 0.5}), 1.0), diag({2, 0})) < 1e-14);
  Matrix m(2, 2);
  m << 1, 0.1, 0.1, 1;
  CHECK(oracle::frob_dist(prox_l1(m, 0.2), diag({0.8, 0.8})) < 1e-14);
  // the soft threshold alone already gives a PSD matrix here
  CHECK(oracle::min_eigenvalue(diag({0.8, 0.8})) >= 0.0);
}

TEST_CASE("comid_step leaves the state alone when the margin holds and lambda is zero") {
  MetricState s = MetricState::identity(2);
  s.mu = 5;
  Constraint c;
  c.x = Vector::Ones(2);
  c.z = Vector::Zero(2);
  c.y = 1;
  const MetricState next = comid_step(s, c, {.eta = 0.3});
  CHECK(next.M == s.M);
  CHECK(next.mu == s.mu);
}

TEST_CASE("comid_step with an inactive hinge shrinks eigenvalues by eta lambda") {
  Rng rng(8, 0);
  MetricState s;
  s.M = oracle::random_psd(3, rng);
  s.mu = 200;
  Constraint c;
  c.x = Vector::Zero(3);
  c.z = Vector::Zero(3);
  c.y = 1;
  const double eta = 0.2, lambda = 0.7;
  const MetricState next = comid_step(s, c, {.eta = eta, .loss = {lambda, Regularizer::nuclear}});
  const Matrix expected =
      oracle::rebuild(oracle::jacobi_eigen(s.M), [&](double v) { return std::max(0.0, v - eta * lambda); });
  CHECK(oracle::frob_dist(next.M, expected) < 1e-12);
  CHECK(next.mu == 200);
}

TEST_CASE("comid_step on a violated constraint matches the numerical minimizer") {
  Rng rng(41, 0);
  for (int i = 0; i < 20; ++i) {
    MetricState s;
    s.M = oracle::random_psd(2, rng);
    s.mu = 1 + rng.uniform();
    Constraint c = random_constraint(2, rng);
    if (margin(s, c) >= 1.0) c.y = -c.y;
    if (margin(s, c) >= 1.0) continue;
    const double eta = 0.1 + 0.4 * rng.uniform(), lambda = rng.uniform();
    const MetricState next = comid_step(s, c, {.eta = eta, .loss = {lambda, Regularizer::nuclear}});
    const Vector u = c.x - c.z;
    const Matrix grad = c.y * u * u.transpose();
    const Matrix numeric = oracle::prox_nuclear_psd_numeric(s.M - eta * grad, eta * lambda);
    CHECK(oracle::frob_dist(next.M, numeric) < 1e-5);
    CHECK(oracle::comid_objective(next.M, s.M, grad, eta, lambda) <=
          oracle::comid_objective(numeric, s.M, grad, eta, lambda) + 1e-9);
    CHECK(next.mu == doctest::Approx(std::max(1.0, s.mu + eta * c.y)));
  }
}

TEST_CASE("comid_step clamps mu at one") {
  MetricState s = MetricState::identity(1);
  Constraint c;
  c.x = Vector::Zero(1);
  c.z = Vector::Zero(1);
  c.y = -1;  // margin -1: violated, pushes mu down
  CHECK(comid_step(s, c, {.eta = 0.5}).mu == 1.0);
}

TEST_CASE("comid_step enforces the norm cap by rescaling") {
  MetricState s = MetricState::identity(2);
  Constraint c;
  c.x = Vector::Ones(2) * 0.5;
  c.z = Vector::Zero(2);
  c.y = -1;  // close pair labeled dissimilar: M grows along u
  const MetricState next = comid_step(s, c, {.eta = 10.0, .norm_cap = 2.0});
  CHECK(operator_norm(next.M) == doctest::Approx(2.0));
  const MetricState uncapped = comid_step(s, c, {.eta = 10.0});
  CHECK(operator_norm(uncapped.M) == doctest::Approx(6.0));
  CHECK(oracle::frob_dist(next.M, uncapped.M * (2.0 / operator_norm(uncapped.M))) < 1e-12);
}

TEST_CASE("comid_step rejects bad configs") {
  Constraint c;
  c.x = Vector::Zero(2);
  c.z = Vector::Zero(2);
  CHECK_THROWS_AS(comid_step(MetricState::identity(2), c, {.eta = 0.0}), InvalidInput);
  CHECK_THROWS_AS(comid_step(MetricState::identity(2), c, {.eta = 1.0, .norm_cap = -1}), InvalidInput);
}

TEST_CASE("static_regret examples") {
  const std::vector<double> a{1, 2, 3}, ones{1, 1}, zeros{0, 0};
  CHECK(static_regret(a, a) == 0.0);
  CHECK(static_regret(ones, zeros) == 2.0);
  Rng rng(4, 0);
  std::vector<double> x(100), y(100);
  double direct = 0.0;
  for (int i = 0; i < 100; ++i) {
    x[i] = rng.uniform();
    y[i] = rng.uniform();
    direct += x[i] - y[i];
  }
  CHECK(static_regret(x, y) == doctest::Approx(direct));
  CHECK_THROWS_AS(static_regret(a, ones), InvalidInput);
}

TEST_CASE("prox output is optimal against perturbations and the plain projection") {
  Rng rng(53, 0);
  for (int i = 0; i < 100; ++i) {
    const Matrix A = oracle::random_symmetric(3, rng);
    const double tau = rng.uniform();
    const Matrix X = prox_nuclear_psd(A, tau);
    const double fx = prox_objective(X, A, tau);
    for (int k = 0; k < 10; ++k) {
      Matrix P = oracle::random_psd(3, rng);
      P *= 0.1 * rng.uniform() / std::max(1e-12, P.norm());
      CHECK(fx <= prox_objective(X + P, A, tau) + 1e-12);
    }
    CHECK(fx <= prox_objective(oracle::psd_projection(A), A, tau) + 1e-12);
  }
}

TEST_CASE("prox is nonexpansive") {
  Rng rng(59, 0);
  for (int i = 0; i < 200; ++i) {
    const Matrix A = oracle::random_symmetric(4, rng), B = oracle::random_symmetric(4, rng);
    const double tau = rng.uniform();
    CHECK(oracle::frob_dist(prox_nuclear_psd(A, tau), prox_nuclear_psd(B, tau)) <= oracle::frob_dist(A, B) + 1e-12);
    CHECK(oracle::frob_dist(prox_l1(A, tau), prox_l1(B, tau)) <= oracle::frob_dist(A, B) + 1e-12);
  }
}

TEST_CASE("comid_step preserves the metric invariants") {
  Rng rng(61, 0);
  for (const Regularizer reg : {Regularizer::nuclear, Regularizer::elementwise_l1}) {
    MetricState s = MetricState::identity(4);
    const ComidConfig cfg{.eta = 0.2, .loss = {0.05, reg}, .norm_cap = 5.0};
    for (int t = 0; t < 2000; ++t) {
      s = comid_step(s, random_constraint(4, rng, 1.5), cfg);
      REQUIRE(s.M == s.M.transpose());
      REQUIRE(oracle::min_eigenvalue(s.M) >= -kPsdSlack);
      REQUIRE(s.mu >= 1.0);
      REQUIRE(operator_norm(s.M) <= 5.0 * (1 + 1e-12));
    }
  }
}

TEST_CASE("comid_step does not modify its input") {
  Rng rng(67, 0);
  MetricState s = MetricState::identity(3);
  const MetricState copy = s;
  Constraint c = random_constraint(3, rng);
  c.y = -1;
  (void)comid_step(s, c, {.eta = 0.5, .loss = {0.1, Regularizer::nuclear}});
  CHECK(s.M == copy.M);
  CHECK(s.mu == copy.mu);
}
