#pragma once

#include <cstdint>
#include <random>

namespace ocelad {

// Seeded generator with explicit transforms so that draws are reproducible
// across standard library implementations (std:: distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n);
  /// Standard normal (Box-Muller, one cached spare).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ocelad
