#include "ocelad/dyadic.hpp"

#include <algorithm>
#include <cmath>

#include "ocelad/errors.hpp"

namespace ocelad {

bool dyadic_interval_at(std::int64_t t, std::int64_t base_length, int level, DyadicInterval& out) {
  if (base_length < 1) throw InvalidInput("base interval length must be positive");
  if (level < 0 || level > 62) throw InvalidInput("dyadic level out of range");
  const std::int64_t len = base_length << level;
  if (t < len) return false;
  const std::int64_t k = t / len;
  out = {level, k * len, (k + 1) * len - 1};
  return true;
}

std::vector<DyadicInterval> active_intervals(std::int64_t t, std::int64_t base_length, int max_level) {
  std::vector<DyadicInterval> out;
  DyadicInterval iv;
  for (int j = 0; j <= max_level && j <= 62; ++j) {
    if (!dyadic_interval_at(t, base_length, j, iv)) break;
    out.push_back(iv);
  }
  return out;
}

double spawn_weight(const DyadicInterval& interval) {
  return std::min(0.5, 1.0 / std::sqrt(static_cast<double>(interval.length())));
}

}  // namespace ocelad
