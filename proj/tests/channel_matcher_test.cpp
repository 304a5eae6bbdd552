#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fedsched/channel_matcher.hpp"

using namespace fedsched;

namespace {

// Rows are sub-channels, columns devices.
UtilityTable small_example() { return UtilityTable(2, {1, 2, 3, 1}); }

UtilityTable sentinel_example() {
  return UtilityTable(2, {kUtilityMax, 5, 4, kUtilityMax});
}

UtilityTable random_table(Rng& rng, int k, double sentinel_share) {
  UtilityTable t(k);
  for (int c = 0; c < k; ++c) {
    for (int d = 0; d < k; ++d) {
      t.at(c, d) = draw_uniform(rng, 0.0, 1.0) < sentinel_share
                       ? kUtilityMax
                       : draw_uniform(rng, 0.5, 20.0);
    }
  }
  return t;
}

double max_utility(const Matching& m, const UtilityTable& t) {
  double worst = 0.0;
  for (int d = 0; d < m.size(); ++d) worst = std::max(worst, utility(m, d, t));
  return worst;
}

double sum_utility(const Matching& m, const UtilityTable& t) {
  double s = 0.0;
  for (int d = 0; d < m.size(); ++d) s += utility(m, d, t);
  return s;
}

}  // namespace

TEST(Utility, PassthroughAndSentinel) {
  UtilityTable t(2, {3.2, kUtilityMax, 7.0, 1.0});
  const Matching m = identity_matching(2);
  EXPECT_EQ(utility(m, 0, t), 3.2);
  EXPECT_EQ(utility(m, 1, t), 1.0);
  const Matching swapped({1, 0});
  EXPECT_EQ(utility(swapped, 1, t), kUtilityMax);
  for (int c = 0; c < 2; ++c) {
    EXPECT_EQ(channel_utility(swapped, c, t), utility(swapped, swapped.device_on(c), t));
  }
}

TEST(Matching, RejectsNonBijection) {
  EXPECT_THROW(Matching({0, 0}), std::invalid_argument);
  EXPECT_THROW(Matching({0, 2}), std::invalid_argument);
  Matching m({2, 0, 1});
  EXPECT_EQ(m.device_on(2), 0);
  m.swap_devices(0, 2);
  EXPECT_EQ(m.channels(), (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(m.device_on(1), 0);
  EXPECT_EQ(m.device_on(2), 2);
}

TEST(SwapBlocking, SmallExample) {
  const UtilityTable t = small_example();
  // d1 on c2 and d2 on c1: utilities (3, 2), after the swap (1, 1).
  EXPECT_TRUE(is_swap_blocking(Matching({1, 0}), 0, 1, t));
  EXPECT_FALSE(is_swap_blocking(identity_matching(2), 0, 1, t));
  const UtilityTable flat(2, {2, 2, 2, 2});
  EXPECT_FALSE(is_swap_blocking(identity_matching(2), 0, 1, flat));
}

TEST(StableMatch, SmallExample) {
  const UtilityTable t = small_example();
  const MatchResult r = stable_match(t, Matching({1, 0}));
  EXPECT_EQ(r.matching, identity_matching(2));
  ASSERT_EQ(r.swaps.size(), 1u);
  const LatencyReport lat = matching_latency(r.matching, t);
  ASSERT_TRUE(lat.latency_s.has_value());
  EXPECT_EQ(*lat.latency_s, 1.0);
  EXPECT_TRUE(lat.dropped.empty());
}

TEST(StableMatch, SentinelExample) {
  const UtilityTable t = sentinel_example();
  const MatchResult r = stable_match(t, identity_matching(2));
  EXPECT_EQ(r.matching, Matching({1, 0}));
  const LatencyReport lat = matching_latency(r.matching, t);
  ASSERT_TRUE(lat.latency_s.has_value());
  EXPECT_EQ(*lat.latency_s, 5.0);
}

TEST(StableMatch, SingleDevice) {
  const UtilityTable t(1, {4.0});
  const MatchResult r = stable_match(t, identity_matching(1));
  EXPECT_EQ(r.matching, identity_matching(1));
  EXPECT_TRUE(r.swaps.empty());
  EXPECT_TRUE(verify_2es(r.matching, t));
}

TEST(Verify2es, DetectsBlockingPair) {
  EXPECT_FALSE(verify_2es(Matching({1, 0}), small_example()));
  EXPECT_TRUE(verify_2es(identity_matching(2), small_example()));
}

TEST(Latency, DroppedDevicesExcluded) {
  const UtilityTable t(2, {3.2, 1.0, 1.0, kUtilityMax});
  const LatencyReport lat = matching_latency(identity_matching(2), t);
  ASSERT_TRUE(lat.latency_s.has_value());
  EXPECT_EQ(*lat.latency_s, 3.2);
  EXPECT_EQ(lat.assigned, (std::vector<int>{0}));
  EXPECT_EQ(lat.dropped, (std::vector<int>{1}));

  const UtilityTable none(2);
  const LatencyReport empty = matching_latency(identity_matching(2), none);
  EXPECT_FALSE(empty.latency_s.has_value());
  EXPECT_EQ(empty.dropped.size(), 2u);
}

TEST(UtilityTable, FromGammaMarksInfeasible) {
  GammaMatrix g(2, 2);
  g.at(0, 0).status = AllocationStatus::kFeasible;
  g.at(0, 0).time_s = 2.5;
  g.at(1, 1).status = AllocationStatus::kFeasible;
  g.at(1, 1).time_s = 4.0;
  const UtilityTable t = UtilityTable::from_gamma(g);
  EXPECT_EQ(t.at(0, 0), 2.5);
  EXPECT_EQ(t.at(0, 1), kUtilityMax);
  EXPECT_EQ(t.at(1, 0), kUtilityMax);
  EXPECT_EQ(t.at(1, 1), 4.0);

  GammaMatrix huge(1, 1);
  huge.at(0, 0).status = AllocationStatus::kFeasible;
  huge.at(0, 0).time_s = 1e10;
  EXPECT_THROW(UtilityTable::from_gamma(huge), std::runtime_error);
}

TEST(StableMatch, RandomInstancesAreStableAndMonotone) {
  Rng rng = RngStreams(4).stream("matcher");
  for (int k = 2; k <= 5; ++k) {
    const int factorial = [&] {
      int f = 1;
      for (int i = 2; i <= k; ++i) f *= i;
      return f;
    }();
    for (int trial = 0; trial < 100; ++trial) {
      const UtilityTable t = random_table(rng, k, 0.2);
      const Matching start = random_matching(rng, k);
      const MatchResult r = stable_match(t, start);
      EXPECT_TRUE(verify_2es(r.matching, t));
      EXPECT_LE(static_cast<int>(r.swaps.size()), factorial);

      // Replay the swap log from the start.
      Matching m = start;
      double sum = sum_utility(m, t);
      for (const SwapEvent& s : r.swaps) {
        EXPECT_LE(s.first_after, s.first_before);
        EXPECT_LE(s.second_after, s.second_before);
        EXPECT_TRUE(s.first_after < s.first_before || s.second_after < s.second_before);
        EXPECT_EQ(utility(m, s.first, t), s.first_before);
        EXPECT_EQ(utility(m, s.second, t), s.second_before);
        m.swap_devices(s.first, s.second);
        const double next = sum_utility(m, t);
        EXPECT_LE(next, sum);
        sum = next;
      }
      EXPECT_EQ(m, r.matching);
      EXPECT_LE(max_utility(r.matching, t), max_utility(start, t));
    }
  }
}

TEST(StableMatch, NeverWorseThanInitialAgainstBruteForce) {
  Rng rng = RngStreams(6).stream("brute");
  int optimal = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const UtilityTable t = random_table(rng, 4, 0.25);
    const Matching start = random_matching(rng, 4);
    const MatchResult r = stable_match(t, start);
    std::vector<int> perm{0, 1, 2, 3};
    double best = kUtilityMax * 2;
    do {
      best = std::min(best, max_utility(Matching(perm), t));
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double got = max_utility(r.matching, t);
    EXPECT_GE(got, best);
    EXPECT_LE(got, max_utility(start, t));
    if (got == best) ++optimal;
  }
  // 2ES is a local notion; the global optimum fraction is reported only.
  RecordProperty("global_optimum_fraction", std::to_string(double(optimal) / trials));
  std::cout << "global min-max optimum reached in " << optimal << "/" << trials
            << " instances\n";
}

TEST(RandomMatching, IsDeterministicBijection) {
  Rng a = RngStreams(8).stream("matcher-init", 2);
  Rng b = RngStreams(8).stream("matcher-init", 2);
  const Matching x = random_matching(a, 6);
  EXPECT_EQ(x, random_matching(b, 6));
  std::vector<int> seen = x.channels();
  std::sort(seen.begin(), seen.end());
  std::vector<int> expected(6);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(seen, expected);
}
