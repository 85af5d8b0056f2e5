#include <cmath>
#include <map>

#include "doctest.h"
#include "ocelad/errors.hpp"
#include "ocelad/rice.hpp"
#include "oracles.hpp"

using namespace ocelad;

namespace {

Constraint violated(std::int64_t t, Rng& rng, int n = 2) {
  Constraint c;
  c.x = oracle::random_vector(n, rng, 2.0);
  c.z = oracle::random_vector(n, rng, 2.0);
  c.y = 1;
  c.t = t;
  return c;
}

const LearnerSlot& slot_at(const RiceEnsemble& ens, int level) {
  for (const auto& s : ens.slots())
    if (s.interval.level == level) return s;
  FAIL("no slot at level " << level);
  return ens.slots().front();
}

bool same(const MetricState& a, const MetricState& b) { return a.M == b.M && a.mu == b.mu; }

}  // namespace

TEST_CASE("rice_advance 1 -> 2 seeds level 1 from the level 0 learner") {
  Rng rng(1, 0);
  RiceEnsemble ens(2, {.eta0 = 0.5});
  ens = rice_advance(ens, 1);
  REQUIRE(ens.slots().size() == 1);
  CHECK(same(ens.slots()[0].state, MetricState::identity(2)));
  ens = rice_step(ens, violated(1, rng), {});
  const MetricState final_01 = ens.slots()[0].state;
  REQUIRE_FALSE(same(final_01, MetricState::identity(2)));

  ens = rice_advance(ens, 2);
  REQUIRE(ens.slots().size() == 2);
  CHECK(slot_at(ens, 1).interval == DyadicInterval{1, 2, 3});
  CHECK(same(slot_at(ens, 1).state, final_01));
  CHECK(same(slot_at(ens, 0).state, final_01));
}

TEST_CASE("rice_advance 3 -> 4 spawns three learners from the right predecessors") {
  Rng rng(2, 0);
  RiceEnsemble ens(2, {.eta0 = 0.5});
  std::map<DyadicInterval, MetricState> final_state;
  for (std::int64_t t = 1; t <= 3; ++t) {
    ens = rice_advance(ens, t);
    ens = rice_step(ens, violated(t, rng), {});
    for (const auto& s : ens.slots()) final_state[s.interval] = s.state;
  }
  ens = rice_advance(ens, 4);
  REQUIRE(ens.slots().size() == 3);
  CHECK(slot_at(ens, 0).interval == DyadicInterval{0, 4, 4});
  CHECK(slot_at(ens, 1).interval == DyadicInterval{1, 4, 5});
  CHECK(slot_at(ens, 2).interval == DyadicInterval{2, 4, 7});
  CHECK(same(slot_at(ens, 2).state, final_state.at({1, 2, 3})));
  CHECK(same(slot_at(ens, 1).state, final_state.at({0, 3, 3})));
  CHECK(same(slot_at(ens, 0).state, final_state.at({0, 3, 3})));
}

TEST_CASE("every spawn copies its predecessor's final state bit for bit") {
  Rng rng(3, 0);
  RiceEnsemble ens(3, {.eta0 = 0.3});
  std::map<DyadicInterval, MetricState> final_state;
  int spawns = 0;
  for (std::int64_t t = 1; t <= 600; ++t) {
    const auto before = ens.slots();
    ens = rice_advance(ens, t);
    for (const auto& s : ens.slots()) {
      bool existed = false;
      for (const auto& b : before) existed |= b.interval == s.interval;
      if (existed || t == 1) continue;
      const int level = s.interval.level == 0 ? 0 : s.interval.level - 1;
      const std::int64_t L = std::int64_t{1} << level;
      const DyadicInterval pred{level, s.interval.start - L, s.interval.start - 1};
      REQUIRE(final_state.count(pred));
      REQUIRE(same(s.state, final_state.at(pred)));
      ++spawns;
    }
    ens = rice_step(ens, violated(t, rng, 3), {0.01, Regularizer::nuclear});
    for (const auto& s : ens.slots()) final_state[s.interval] = s.state;
  }
  CHECK(spawns > 600);
}

TEST_CASE("learning rates and initial weights follow the interval length") {
  RiceEnsemble ens(2, {.eta0 = 0.8});
  for (std::int64_t t = 1; t <= 300; ++t) ens = rice_advance(ens, t);
  const auto& slots = ens.slots();
  REQUIRE(slots.size() == 9);
  for (std::size_t j = 0; j < slots.size(); ++j) {
    CHECK(slots[j].eta == doctest::Approx(0.8 / std::sqrt(std::pow(2.0, static_cast<double>(j)))));
    CHECK(slots[j].weight == doctest::Approx(std::min(0.5, 1.0 / std::sqrt(std::pow(2.0, static_cast<double>(j))))));
    if (j > 0) CHECK(slots[j].eta < slots[j - 1].eta);
  }
}

TEST_CASE("an ensemble that never sees a violation keeps every learner at the start state") {
  RiceEnsemble ens(2, {.eta0 = 1.0});
  for (std::int64_t t = 1; t <= 100; ++t) {
    ens = rice_advance(ens, t);
    Constraint c;
    c.x = Vector::Zero(2);
    c.z = Vector::Zero(2);
    c.y = 1;
    c.t = t;
    ens = rice_step(ens, c, {});
    for (const auto& s : ens.slots()) REQUIRE(same(s.state, MetricState::identity(2)));
  }
}

TEST_CASE("rice_step with a single learner equals comid_step") {
  Rng rng(4, 0);
  RiceEnsemble ens(2, {.eta0 = 0.7});
  ens = rice_advance(ens, 1);
  const Constraint c = violated(1, rng);
  const LossParams lp{0.1, Regularizer::nuclear};
  const MetricState expected =
      comid_step(MetricState::identity(2), c, {.eta = 0.7, .loss = lp, .norm_cap = ens.norm_cap()});
  ens = rice_step(ens, c, lp);
  CHECK(same(ens.slots()[0].state, expected));
}

TEST_CASE("rice_step with two learners matches standalone steps at each rate") {
  Rng rng(5, 0);
  RiceEnsemble ens(2, {.eta0 = 0.7});
  ens = rice_advance(ens, 1);
  ens = rice_step(ens, violated(1, rng), {});
  ens = rice_advance(ens, 2);
  REQUIRE(ens.slots().size() == 2);
  const auto before = ens.slots();

  Constraint quiet;
  quiet.x = Vector::Zero(2);
  quiet.z = Vector::Zero(2);
  quiet.y = 1;
  quiet.t = 2;
  const RiceEnsemble unchanged = rice_step(ens, quiet, {});
  for (std::size_t i = 0; i < 2; ++i) CHECK(same(unchanged.slots()[i].state, before[i].state));

  Constraint c;
  c.x = Vector{{3.0, 0.0}};
  c.z = Vector::Zero(2);
  c.y = 1;
  c.t = 2;
  REQUIRE(margin_loss(before[0].state, c) > 0.0);
  ens = rice_step(ens, c, {});
  for (std::size_t i = 0; i < 2; ++i) {
    const MetricState expected = comid_step(before[i].state, c, {.eta = before[i].eta, .norm_cap = ens.norm_cap()});
    CHECK(same(ens.slots()[i].state, expected));
  }
  CHECK_FALSE(same(ens.slots()[0].state, ens.slots()[1].state));
}

TEST_CASE("ensemble preconditions") {
  RiceEnsemble ens(2, {});
  CHECK_THROWS_AS(rice_advance(ens, 2), InvalidInput);
  ens = rice_advance(ens, 1);
  Constraint c;
  c.x = Vector::Zero(2);
  c.z = Vector::Zero(2);
  c.t = 3;
  CHECK_THROWS_AS(rice_step(ens, c, {}), InvalidInput);
  CHECK_THROWS_AS(RiceEnsemble(2, {.eta0 = 0.0}), InvalidInput);
  CHECK_THROWS_AS(RiceEnsemble(0, {}), InvalidInput);
}

TEST_CASE("without retro-initialization every spawn starts fresh") {
  Rng rng(6, 0);
  RiceEnsemble ens(2, {.eta0 = 0.5, .retro_init = false});
  for (std::int64_t t = 1; t <= 40; ++t) {
    const auto before = ens.slots();
    ens = rice_advance(ens, t);
    for (const auto& s : ens.slots()) {
      bool existed = false;
      for (const auto& b : before) existed |= b.interval == s.interval;
      if (!existed) REQUIRE(same(s.state, MetricState::identity(2)));
    }
    ens = rice_step(ens, violated(t, rng), {});
  }
}

TEST_CASE("the level cap bounds the ensemble size") {
  RiceEnsemble ens(2, {.max_level = 2});
  for (std::int64_t t = 1; t <= 100; ++t) {
    ens = rice_advance(ens, t);
    REQUIRE(ens.slots().size() <= 3);
  }
  CHECK(ens.slots().size() == 3);
}

TEST_CASE("a base length above one maps the first constraint to the first base interval") {
  RiceEnsemble ens(2, {.base_length = 4});
  ens = rice_advance(ens, 1);
  REQUIRE(ens.slots().size() == 1);
  CHECK(ens.slots()[0].interval == DyadicInterval{0, 4, 7});
  for (std::int64_t t = 2; t <= 5; ++t) ens = rice_advance(ens, t);
  CHECK(ens.slots().size() == 2);
  CHECK(ens.slots()[1].interval == DyadicInterval{1, 8, 15});
}
