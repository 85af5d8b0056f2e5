#include "ocelad/learners.hpp"

#include "ocelad/errors.hpp"

namespace ocelad {

FixedComidLearner::FixedComidLearner(MetricState initial, ComidConfig cfg) : state_(std::move(initial)), cfg_(cfg) {
  validate_state(state_);
}

MetricState FixedComidLearner::step(const Constraint& c) {
  MetricState estimate = state_;
  state_ = comid_step(state_, c, cfg_);
  return estimate;
}

RiceOceladLearner::RiceOceladLearner(Eigen::Index dim, RiceConfig cfg, LossParams lp,
                                     std::optional<std::uint64_t> selection_seed)
    : ensemble_(dim, cfg), lp_(lp) {
  if (selection_seed) select_rng_.emplace(*selection_seed, 0);
}

MetricState RiceOceladLearner::step(const Constraint& c) {
  OceladStep res = select_rng_ ? ocelad_step_select(std::move(ensemble_), std::move(weights_), c, lp_, *select_rng_)
                               : ocelad_step(std::move(ensemble_), std::move(weights_), c, lp_);
  ensemble_ = std::move(res.ensemble);
  weights_ = std::move(res.weights);
  last_ = std::move(res.output);
  if (observer_) observer_(last_, ensemble_);
  return last_.theta_hat;
}

}  // namespace ocelad
