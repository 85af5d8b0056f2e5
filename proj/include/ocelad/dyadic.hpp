#pragma once

#include <compare>
#include <cstdint>
#include <vector>

namespace ocelad {

/// Default cap on the number of dyadic scales above the base level.
inline constexpr int kDefaultMaxLevel = 20;

/// Interval [start, end] of the dyadic set: length I0 * 2^level, starting at a
/// positive multiple of its own length.
struct DyadicInterval {
  int level = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end - start + 1; }
  bool contains(std::int64_t t) const { return start <= t && t <= end; }

  auto operator<=>(const DyadicInterval&) const = default;
};

/// The level-`level` interval containing t, or nothing if t precedes the first one.
bool dyadic_interval_at(std::int64_t t, std::int64_t base_length, int level, DyadicInterval& out);

/// ACT(t): one interval per level j with I0 * 2^j <= t (and j <= max_level),
/// ordered by level.
std::vector<DyadicInterval> active_intervals(std::int64_t t, std::int64_t base_length,
                                             int max_level = kDefaultMaxLevel);

/// Initial multiplicative weight of a learner: min(1/2, 1/sqrt(|I|)).
double spawn_weight(const DyadicInterval& interval);

}  // namespace ocelad
