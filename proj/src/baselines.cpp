#include "ocelad/baselines.hpp"

#include "ocelad/errors.hpp"

namespace ocelad {

std::unique_ptr<OnlineMetricLearner> make_baseline(const BaselineSpec& spec, Eigen::Index dim, const LossParams& lp) {
  if (!(spec.eta > 0.0)) throw InvalidInput("baseline learning rate must be positive");
  if (spec.kind == BaselineSpec::Kind::comid_fixed) {
    return std::make_unique<FixedComidLearner>(
        MetricState::identity(dim), ComidConfig{.eta = spec.eta, .loss = lp, .norm_cap = ComidConfig::default_norm_cap(dim)});
  }
  RiceConfig cfg{.eta0 = spec.eta, .base_length = spec.base_length, .max_level = spec.max_level, .retro_init = false};
  return std::make_unique<RiceOceladLearner>(dim, cfg, lp, spec.seed);
}

std::vector<MetricState> run_baseline(const BaselineSpec& spec, const std::vector<Constraint>& stream,
                                      const LossParams& lp) {
  std::vector<MetricState> out;
  if (stream.empty()) return out;
  auto learner = make_baseline(spec, stream.front().x.size(), lp);
  out.reserve(stream.size());
  for (const Constraint& c : stream) out.push_back(learner->step(c));
  return out;
}

}  // namespace ocelad
