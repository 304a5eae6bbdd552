#include "fedsched/rng.hpp"

#include <cmath>

namespace fedsched {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng RngStreams::stream(std::string_view name, std::uint64_t index) const {
  std::uint64_t key = splitmix64(master_seed_);
  key = splitmix64(key ^ fnv1a(name));
  key = splitmix64(key ^ index);
  return Rng(key);
}

double draw_uniform(Rng& rng, double lo, double hi) {
  // 53 random mantissa bits; avoids the implementation-defined
  // generate_canonical so streams are stable across standard libraries.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double draw_exponential(Rng& rng) {
  return -std::log1p(-draw_uniform(rng, 0.0, 1.0));
}

double draw_normal(Rng& rng) {
  constexpr double kTwoPi = 6.283185307179586;
  const double u1 = 1.0 - draw_uniform(rng, 0.0, 1.0);
  const double u2 = draw_uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace fedsched
