#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ocelad/comid.hpp"
#include "ocelad/dyadic.hpp"

namespace ocelad {

/// One ensemble member: a COMID learner bound to a dyadic interval.
struct LearnerSlot {
  DyadicInterval interval;
  double eta = 0.0;
  MetricState state;
  double weight = 0.0;
};

struct RiceConfig {
  double eta0 = 1.0;
  std::int64_t base_length = 1;  // I0
  int max_level = kDefaultMaxLevel;
  /// When false every spawned learner starts from `initial` (SAOL-style ablation).
  bool retro_init = true;
  double norm_cap = 0.0;  // <= 0 selects ComidConfig::default_norm_cap(dim)
};

/// Retro-initialized COMID ensemble over the dyadic interval set.
///
/// Stream time t (first constraint at t = 1) is mapped onto the dyadic clock as
/// t + I0 - 1, so the first level-0 interval [I0, 2 I0 - 1] opens with the
/// first constraint whatever the base length.
class RiceEnsemble {
 public:
  RiceEnsemble(Eigen::Index dim, RiceConfig config, MetricState initial);
  RiceEnsemble(Eigen::Index dim, RiceConfig config);

  const RiceConfig& config() const { return config_; }
  Eigen::Index dim() const { return dim_; }
  /// Stream time of the last advance (0 before the first).
  std::int64_t t() const { return t_; }
  std::int64_t clock() const { return t_ + config_.base_length - 1; }
  const std::vector<LearnerSlot>& slots() const { return slots_; }
  std::vector<LearnerSlot>& slots() { return slots_; }
  /// Final states of retired learners, keyed by (level, end).
  const std::map<std::pair<int, std::int64_t>, MetricState>& finished() const { return finished_; }
  double norm_cap() const;

  void advance(std::int64_t t);
  void step(const Constraint& c, const LossParams& lp);

 private:
  const MetricState& predecessor(const DyadicInterval& iv) const;

  Eigen::Index dim_;
  RiceConfig config_;
  MetricState initial_;
  std::int64_t t_ = 0;
  std::vector<LearnerSlot> slots_;  // ordered by level
  std::map<std::pair<int, std::int64_t>, MetricState> finished_;
};

/// Retires learners whose interval ended at t - 1 and spawns the new members of ACT(t).
RiceEnsemble rice_advance(RiceEnsemble ens, std::int64_t t);

/// One COMID step of every active learner at its own rate.
RiceEnsemble rice_step(RiceEnsemble ens, const Constraint& c, const LossParams& lp);

}  // namespace ocelad
