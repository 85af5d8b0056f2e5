#pragma once

#include <map>
#include <optional>

#include "ocelad/random.hpp"
#include "ocelad/rice.hpp"

namespace ocelad {

using WeightTable = std::map<DyadicInterval, double>;
using StateTable = std::map<DyadicInterval, MetricState>;
using IntervalValues = std::map<DyadicInterval, double>;

struct WeightUpdate {
  WeightTable weights;
  IntervalValues regrets;  // r_t(I)
  /// 1 / max_I |r_t(I)|, or 0 when every regret is zero and the update was skipped.
  double rho = 0.0;
};

/// Record of one combiner step.
struct CombinerOutput {
  std::int64_t t = 0;
  MetricState theta_hat;
  IntervalValues per_learner_losses;
  IntervalValues regrets;
  double rho = 0.0;
  WeightTable weights;  // w_t(I) used for the estimate (before the update)
  /// Member whose state was returned, when the output came from saol_select.
  std::optional<DyadicInterval> selected;
};

/// Weighted average of member states with p_I = w(I) / sum w.
MetricState combine(const WeightTable& weights, const StateTable& states);

/// Multiplicative update from rescaled estimated regrets.
WeightUpdate update_weights(const WeightTable& weights, const IntervalValues& losses);

struct OceladStep {
  RiceEnsemble ensemble;
  WeightTable weights;
  CombinerOutput output;
};

/// One full RICE-OCELAD step: spawn/retire, evaluate member losses, combine,
/// update learners, update weights.
OceladStep ocelad_step(RiceEnsemble ens, WeightTable weights, const Constraint& c, const LossParams& lp);

/// Same pipeline, but the step's estimate is a single member drawn by
/// saol_select instead of the convex combination.
OceladStep ocelad_step_select(RiceEnsemble ens, WeightTable weights, const Constraint& c, const LossParams& lp,
                              Rng& rng);

/// Draws one member with probability w(I) / sum w and returns its state unmixed.
std::pair<DyadicInterval, MetricState> saol_select(const WeightTable& weights, const StateTable& states, Rng& rng);

/// Current member states keyed by interval.
StateTable member_states(const RiceEnsemble& ens);

}  // namespace ocelad
