#include <cmath>
#include <set>
#include <tuple>

#include "doctest.h"
#include "invariants.hpp"
#include "ocelad/errors.hpp"
#include "ocelad/learners.hpp"
#include "oracles.hpp"

using namespace ocelad;

namespace {

MetricState make(const Matrix& M, double mu) {
  MetricState s;
  s.M = M;
  s.mu = mu;
  return s;
}

Constraint random_constraint(std::int64_t t, Rng& rng, int n, double scale = 1.0) {
  Constraint c;
  c.x = oracle::random_vector(n, rng, scale);
  c.z = oracle::random_vector(n, rng, scale);
  c.y = rng.uniform() < 0.4 ? 1 : -1;
  c.t = t;
  return c;
}

bool same(const MetricState& a, const MetricState& b) { return a.M == b.M && a.mu == b.mu; }

const DyadicInterval I11{0, 1, 1}, I22{0, 2, 2}, I23{1, 2, 3}, I33{0, 3, 3};

}  // namespace

TEST_CASE("combine examples") {
  Rng rng(1, 0);
  const MetricState A = make(oracle::random_psd(2, rng), 1.5), B = make(oracle::random_psd(2, rng), 3.0);
  CHECK(same(combine({{I11, 0.3}}, {{I11, A}}), A));

  const MetricState mean = combine({{I22, 1.0}, {I23, 1.0}}, {{I22, A}, {I23, B}});
  CHECK(oracle::frob_dist(mean.M, 0.5 * (A.M + B.M)) < 1e-15);
  CHECK(mean.mu == doctest::Approx(2.25));

  const MetricState mix = combine({{I22, 1.0}, {I23, 3.0}}, {{I22, A}, {I23, B}});
  CHECK(oracle::frob_dist(mix.M, 0.25 * A.M + 0.75 * B.M) < 1e-15);
  CHECK(mix.mu == doctest::Approx(0.25 * 1.5 + 0.75 * 3.0));
}

TEST_CASE("combine rejects empty and mismatched tables") {
  CHECK_THROWS_AS(combine({}, {}), InvalidInput);
  CHECK_THROWS_AS(combine({{I11, 1.0}}, {{I22, MetricState::identity(2)}}), InvalidInput);
  CHECK_THROWS_AS(combine({{I11, 1.0}, {I22, 1.0}}, {{I11, MetricState::identity(2)}}), InvalidInput);
}

TEST_CASE("update_weights examples") {
  const WeightUpdate single = update_weights({{I11, 0.5}}, {{I11, 3.0}});
  CHECK(single.weights.at(I11) == 0.5);
  CHECK(single.regrets.at(I11) == 0.0);
  CHECK(single.rho == 0.0);

  const WeightUpdate tie = update_weights({{I22, 0.5}, {I23, 0.5}}, {{I22, 2.0}, {I23, 2.0}});
  CHECK(tie.weights.at(I22) == 0.5);
  CHECK(tie.weights.at(I23) == 0.5);

  // equal weights, losses (0, 1): r = (0.5, -0.5), rho = 2, eta_I = 1/2 for both
  const WeightUpdate u = update_weights({{I22, 0.5}, {I23, 0.5}}, {{I22, 0.0}, {I23, 1.0}});
  CHECK(u.regrets.at(I22) == doctest::Approx(0.5));
  CHECK(u.regrets.at(I23) == doctest::Approx(-0.5));
  CHECK(u.rho == doctest::Approx(2.0));
  CHECK(u.weights.at(I22) == doctest::Approx(0.5 * 1.5));
  CHECK(u.weights.at(I23) == doctest::Approx(0.5 * 0.5));

  const DyadicInterval long_iv{4, 16, 31};  // eta_I = 1/4
  const WeightUpdate v = update_weights({{I22, 1.0}, {long_iv, 1.0}}, {{I22, 1.0}, {long_iv, 0.0}});
  CHECK(v.weights.at(long_iv) == doctest::Approx(1.0 + 0.25));
  CHECK(v.weights.at(I22) == doctest::Approx(1.0 - 0.5));
}

TEST_CASE("update_weights rejects non-finite losses") {
  CHECK_THROWS_AS(update_weights({{I11, 0.5}}, {{I11, std::nan("")}}), InvalidInput);
  CHECK_THROWS_AS(update_weights({{I11, 0.5}}, {{I11, INFINITY}}), InvalidInput);
}

TEST_CASE("weights stay positive under arbitrary loss sequences") {
  Rng rng(9, 0);
  WeightTable w;
  for (const auto& iv : active_intervals(5000, 1)) w[iv] = spawn_weight(iv);
  for (int step = 0; step < 2000; ++step) {
    IntervalValues losses;
    for (const auto& [iv, _] : w) losses[iv] = std::pow(10.0, rng.uniform(-6, 6)) * (rng.uniform() < 0.5 ? 0 : 1);
    w = update_weights(w, losses).weights;
    for (const auto& [iv, x] : w) REQUIRE(x > 0.0);
  }
}

TEST_CASE("ocelad_step at t = 1 returns the single learner's state") {
  RiceEnsemble ens(2, {.eta0 = 0.5});
  Rng rng(2, 0);
  const OceladStep s = ocelad_step(ens, {}, random_constraint(1, rng, 2), {});
  CHECK(same(s.output.theta_hat, MetricState::identity(2)));
  CHECK(s.weights.at(I11) == 0.5);
}

TEST_CASE("ocelad_step requires consecutive times") {
  RiceEnsemble ens(2, {});
  Rng rng(2, 0);
  CHECK_THROWS_AS(ocelad_step(ens, {}, random_constraint(2, rng, 2), {}), InvalidInput);
}

TEST_CASE("a converged ensemble gives a constant estimate") {
  RiceEnsemble ens(2, {.eta0 = 1.0});
  WeightTable w;
  for (std::int64_t t = 1; t <= 64; ++t) {
    Constraint c;
    c.x = Vector::Zero(2);
    c.z = Vector::Zero(2);
    c.y = 1;
    c.t = t;
    OceladStep s = ocelad_step(std::move(ens), std::move(w), c, {});
    // normalized weights sum to one up to rounding
    REQUIRE(oracle::frob_dist(s.output.theta_hat.M, Matrix::Identity(2, 2)) < 1e-12);
    REQUIRE(std::abs(s.output.theta_hat.mu - 1.0) < 1e-12);
    ens = std::move(s.ensemble);
    w = std::move(s.weights);
  }
}

TEST_CASE("three steps follow the scripted pipeline") {
  Rng rng(12, 0);
  const double eta0 = 0.4;
  const LossParams lp{0.05, Regularizer::nuclear};
  std::vector<Constraint> cs;
  for (std::int64_t t = 1; t <= 3; ++t) {
    Constraint c = random_constraint(t, rng, 2, 1.5);
    c.y = t == 2 ? -1 : 1;
    cs.push_back(c);
  }
  RiceEnsemble ens(2, {.eta0 = eta0});
  const double cap = ens.norm_cap();
  auto step = [&](const MetricState& s, const Constraint& c, double eta) {
    return comid_step(s, c, {.eta = eta, .loss = lp, .norm_cap = cap});
  };

  // t = 1: one learner on [1,1], weight 1/2, estimate = identity
  const MetricState S0 = MetricState::identity(2);
  OceladStep r1 = ocelad_step(ens, {}, cs[0], lp);
  CHECK(same(r1.output.theta_hat, S0));
  CHECK(r1.output.per_learner_losses.at(I11) == margin_loss(S0, cs[0]));
  const MetricState S1 = step(S0, cs[0], eta0);
  CHECK(same(r1.ensemble.slots()[0].state, S1));
  CHECK(r1.weights.at(I11) == 0.5);

  // t = 2: [1,1] retires; [2,2] and [2,3] both start from S1 with weight 1/2.
  // Equal losses, so the weights do not move.
  OceladStep r2 = ocelad_step(r1.ensemble, r1.weights, cs[1], lp);
  CHECK(oracle::frob_dist(r2.output.theta_hat.M, S1.M) < 1e-15);
  CHECK(r2.output.rho == 0.0);
  CHECK(r2.weights.at(I22) == 0.5);
  CHECK(r2.weights.at(I23) == 0.5);
  const MetricState A2 = step(S1, cs[1], eta0);
  const MetricState B2 = step(S1, cs[1], eta0 / std::sqrt(2.0));

  // t = 3: [2,2] retires, [3,3] chains from A2; [2,3] keeps B2.
  OceladStep r3 = ocelad_step(r2.ensemble, r2.weights, cs[2], lp);
  const double la = margin_loss(A2, cs[2]), lb = margin_loss(B2, cs[2]);
  CHECK(r3.output.per_learner_losses.at(I33) == doctest::Approx(la));
  CHECK(r3.output.per_learner_losses.at(I23) == doctest::Approx(lb));
  CHECK(oracle::frob_dist(r3.output.theta_hat.M, 0.5 * A2.M + 0.5 * B2.M) < 1e-14);
  CHECK(r3.output.theta_hat.mu == doctest::Approx(0.5 * A2.mu + 0.5 * B2.mu));
  const double mixed = 0.5 * la + 0.5 * lb;
  const double ra = mixed - la, rb = mixed - lb;
  REQUIRE(std::max(std::abs(ra), std::abs(rb)) > 0.0);
  const double rho = 1.0 / std::max(std::abs(ra), std::abs(rb));
  CHECK(r3.weights.at(I33) == doctest::Approx(0.5 * (1 + 0.5 * rho * ra)));
  CHECK(r3.weights.at(I23) == doctest::Approx(0.5 * (1 + 0.5 * rho * rb)));
  for (const auto& slot : r3.ensemble.slots()) {
    if (slot.interval == I33) CHECK(oracle::frob_dist(slot.state.M, step(A2, cs[2], eta0).M) < 1e-14);
    if (slot.interval == I23) CHECK(oracle::frob_dist(slot.state.M, step(B2, cs[2], eta0 / std::sqrt(2.0)).M) < 1e-14);
  }
}

TEST_CASE("saol_select examples") {
  Rng rng(3, 0);
  const MetricState A = make(2 * Matrix::Identity(2, 2), 1), B = make(3 * Matrix::Identity(2, 2), 2);
  for (int i = 0; i < 10; ++i) CHECK(saol_select({{I11, 0.2}}, {{I11, A}}, rng).first == I11);

  Rng r1(77, 0), r2(77, 0);
  for (int i = 0; i < 100; ++i) {
    CHECK(saol_select({{I22, 1.0}, {I23, 1.0}}, {{I22, A}, {I23, B}}, r1).first ==
          saol_select({{I22, 1.0}, {I23, 1.0}}, {{I22, A}, {I23, B}}, r2).first);
  }

  int picks = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto [iv, s] = saol_select({{I22, 0.9}, {I23, 0.1}}, {{I22, A}, {I23, B}}, rng);
    picks += iv == I22;
    REQUIRE(same(s, iv == I22 ? A : B));
  }
  CHECK(std::abs(picks / static_cast<double>(draws) - 0.9) < 0.02);
  CHECK_THROWS_AS(saol_select({}, {}, rng), InvalidInput);
}

TEST_CASE("combiner invariants hold on random streams") {
  for (const auto& [seed, reg, lambda] :
       {std::tuple{1ULL, Regularizer::nuclear, 0.0}, std::tuple{2ULL, Regularizer::nuclear, 0.05},
        std::tuple{3ULL, Regularizer::elementwise_l1, 0.02}}) {
    Rng rng(seed, 0);
    RiceOceladLearner learner(3, {.eta0 = 0.5}, {lambda, reg});
    check::InvariantChecker checker(learner);
    for (std::int64_t t = 1; t <= 3000; ++t) checker.step(random_constraint(t, rng, 3, 1.2));
    const auto& rep = checker.report();
    CHECK(rep.steps == 3000);
    CHECK(rep.weight_violations == 0);
    CHECK(rep.zero_sum_violations == 0);
    CHECK(rep.jensen_violations == 0);
    CHECK(rep.shadow_violations == 0);
    CHECK(rep.interval_violations == 0);
    CHECK(rep.intervals_checked > 3000);
  }
}

TEST_CASE("shadow weights count the intervals started so far") {
  Rng rng(5, 0);
  RiceOceladLearner learner(2, {.eta0 = 0.5}, {});
  std::map<DyadicInterval, double> shadow;
  std::set<DyadicInterval> started;
  for (std::int64_t t = 1; t <= 500; ++t) {
    learner.step(random_constraint(t, rng, 2));
    for (const auto& [iv, w] : learner.weights()) {
      shadow[iv] = w / spawn_weight(iv);
      started.insert(iv);
    }
    double W = 0.0;
    for (const auto& [iv, w] : shadow) W += w;
    REQUIRE(W == doctest::Approx(static_cast<double>(started.size())).epsilon(1e-9));
  }
}
