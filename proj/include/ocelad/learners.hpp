#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "ocelad/ocelad.hpp"

namespace ocelad {

/// Online metric learner driven one constraint at a time. step() returns the
/// estimate for time t made before the learner sees constraint t.
class OnlineMetricLearner {
 public:
  virtual ~OnlineMetricLearner() = default;
  virtual MetricState step(const Constraint& c) = 0;
};

/// Single COMID learner with a constant learning rate.
class FixedComidLearner final : public OnlineMetricLearner {
 public:
  FixedComidLearner(MetricState initial, ComidConfig cfg);
  MetricState step(const Constraint& c) override;
  const MetricState& state() const { return state_; }

 private:
  MetricState state_;
  ComidConfig cfg_;
};

/// RICE ensemble combined by OCELAD weights; with a selection seed the output
/// is a weighted random member instead (SAOL-style).
class RiceOceladLearner final : public OnlineMetricLearner {
 public:
  using Observer = std::function<void(const CombinerOutput&, const RiceEnsemble&)>;

  RiceOceladLearner(Eigen::Index dim, RiceConfig cfg, LossParams lp, std::optional<std::uint64_t> selection_seed = {});
  MetricState step(const Constraint& c) override;

  const RiceEnsemble& ensemble() const { return ensemble_; }
  const WeightTable& weights() const { return weights_; }
  const CombinerOutput& last_output() const { return last_; }
  /// Called after every step with the step record and the updated ensemble.
  void set_observer(Observer obs) { observer_ = std::move(obs); }

 private:
  RiceEnsemble ensemble_;
  WeightTable weights_;
  LossParams lp_;
  std::optional<Rng> select_rng_;
  CombinerOutput last_;
  Observer observer_;
};

}  // namespace ocelad
