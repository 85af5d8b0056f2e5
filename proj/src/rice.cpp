#include "ocelad/rice.hpp"

#include <cmath>
#include <string>

#include "ocelad/errors.hpp"

namespace ocelad {

RiceEnsemble::RiceEnsemble(Eigen::Index dim, RiceConfig config, MetricState initial)
    : dim_(dim), config_(config), initial_(std::move(initial)) {
  if (dim < 1) throw InvalidInput("ensemble dimension must be positive");
  if (!(config_.eta0 > 0.0)) throw InvalidInput("base learning rate must be positive");
  if (config_.base_length < 1) throw InvalidInput("base interval length must be positive");
  if (config_.max_level < 0) throw InvalidInput("maximum level must be nonnegative");
  if (initial_.dim() != dim) throw InvalidInput("initial state dimension mismatch");
  validate_state(initial_);
}

RiceEnsemble::RiceEnsemble(Eigen::Index dim, RiceConfig config)
    : RiceEnsemble(dim, config, MetricState::identity(dim)) {}

double RiceEnsemble::norm_cap() const {
  return config_.norm_cap > 0.0 ? config_.norm_cap : ComidConfig::default_norm_cap(dim_);
}

const MetricState& RiceEnsemble::predecessor(const DyadicInterval& iv) const {
  const int level = iv.level == 0 ? 0 : iv.level - 1;
  const auto it = finished_.find({level, iv.start - 1});
  if (it == finished_.end()) {
    throw LogicError("no finished learner at level " + std::to_string(level) + " ending at " +
                     std::to_string(iv.start - 1));
  }
  return it->second;
}

void RiceEnsemble::advance(std::int64_t t) {
  if (t != t_ + 1) throw InvalidInput("ensemble must advance one step at a time");
  t_ = t;
  const std::int64_t now = clock();

  for (auto it = slots_.begin(); it != slots_.end();) {
    if (it->interval.end < now) {
      // one generation per level is enough for retro-initialization
      std::erase_if(finished_, [&](const auto& kv) { return kv.first.first == it->interval.level; });
      finished_.emplace(std::pair{it->interval.level, it->interval.end}, std::move(it->state));
      it = slots_.erase(it);
    } else {
      ++it;
    }
  }

  std::vector<LearnerSlot> next;
  next.reserve(static_cast<std::size_t>(config_.max_level) + 1);
  auto existing = slots_.begin();
  for (const DyadicInterval& iv : active_intervals(now, config_.base_length, config_.max_level)) {
    if (existing != slots_.end() && existing->interval == iv) {
      next.push_back(std::move(*existing++));
      continue;
    }
    LearnerSlot slot;
    slot.interval = iv;
    slot.eta = config_.eta0 / std::sqrt(static_cast<double>(iv.length()));
    slot.weight = spawn_weight(iv);
    const bool first = iv.level == 0 && iv.start == config_.base_length;
    slot.state = (!config_.retro_init || first) ? initial_ : predecessor(iv);
    next.push_back(std::move(slot));
  }
  if (existing != slots_.end()) throw LogicError("active learner missing from ACT(t)");
  slots_ = std::move(next);
}

void RiceEnsemble::step(const Constraint& c, const LossParams& lp) {
  if (c.t != t_) throw InvalidInput("constraint time does not match ensemble time");
  ComidConfig cfg{.eta = 0.0, .loss = lp, .norm_cap = norm_cap()};
  for (LearnerSlot& slot : slots_) {
    cfg.eta = slot.eta;
    slot.state = comid_step(slot.state, c, cfg);
  }
}

RiceEnsemble rice_advance(RiceEnsemble ens, std::int64_t t) {
  ens.advance(t);
  return ens;
}

RiceEnsemble rice_step(RiceEnsemble ens, const Constraint& c, const LossParams& lp) {
  ens.step(c, lp);
  return ens;
}

}  // namespace ocelad
