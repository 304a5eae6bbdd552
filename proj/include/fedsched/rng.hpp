#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fedsched {

using Rng = std::mt19937_64;

// Derives independent, named random streams from one master seed.
//
// Each stream is identified by a name and an integer index (typically the
// round number), so that drawing from one stream never shifts the draws of
// another. Two schemes run with the same master seed therefore see the same
// placement, partition and channel realizations.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t master_seed) : master_seed_(master_seed) {}

  Rng stream(std::string_view name, std::uint64_t index = 0) const;

  std::uint64_t master_seed() const { return master_seed_; }

 private:
  std::uint64_t master_seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Unit-mean exponential draw, i.e. |g|^2 for g ~ CN(0, 1).
double draw_exponential(Rng& rng);

double draw_uniform(Rng& rng, double lo, double hi);

// Standard normal draw (Box-Muller, one variate per call).
double draw_normal(Rng& rng);

}  // namespace fedsched
