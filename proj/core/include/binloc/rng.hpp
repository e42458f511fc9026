#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace binloc {

// Engine plus distribution transforms written out explicitly, so a given seed
// produces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }
  double gaussian();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
// Seed for an independent stream keyed by (master seed, label, index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index);

}  // namespace binloc
