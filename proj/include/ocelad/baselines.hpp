#pragma once

#include <cstdint>
#include <vector>

#include "ocelad/learners.hpp"

namespace ocelad {

struct BaselineSpec {
  enum class Kind { comid_fixed, saol_random };
  Kind kind = Kind::comid_fixed;
  /// Constant rate for comid_fixed; base rate eta0 for saol_random.
  double eta = 0.1;
  std::uint64_t seed = 0;
  std::int64_t base_length = 1;
  int max_level = kDefaultMaxLevel;
};

std::unique_ptr<OnlineMetricLearner> make_baseline(const BaselineSpec& spec, Eigen::Index dim, const LossParams& lp);

/// Per-step estimates of the baseline over the stream.
std::vector<MetricState> run_baseline(const BaselineSpec& spec, const std::vector<Constraint>& stream,
                                      const LossParams& lp);

}  // namespace ocelad
