#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fedsched/device_selector.hpp"
#include "fedsched/follower.hpp"

using namespace fedsched;

namespace {

// N devices with the given sample counts, every pair comfortably feasible
// except for the devices listed in `dead`, whose gains meet the
// infeasibility condition on every sub-channel.
struct Cell {
  SystemConfig config;
  std::vector<Device> devices;
  ChannelMatrix channels;
};

Cell make_cell(const std::vector<int>& samples, int K, const std::vector<int>& dead) {
  Cell c;
  c.config.num_devices = static_cast<int>(samples.size());
  c.config.num_subchannels = K;
  for (int i = 0; i < c.config.num_devices; ++i) {
    Device d;
    d.id = i;
    d.samples = samples[i];
    d.distance_m = 100.0;
    c.devices.push_back(d);
  }
  const double threshold = std::log(2.0) * c.config.transmit_power_w *
                           c.config.model_size_bits /
                           (c.config.energy_budget_j * c.config.bandwidth_hz);
  c.channels = ChannelMatrix{1, K, c.config.num_devices,
                             std::vector<double>(static_cast<std::size_t>(K) * samples.size(), 50.0)};
  for (int id : dead) {
    for (int k = 0; k < K; ++k) c.channels.gain(k, id) = 0.5 * threshold;
  }
  return c;
}

}  // namespace

TEST(AoU, UpdateExamples) {
  EXPECT_EQ(update_aou(AoUState{{3, 1}}, {false, true}).ages, (std::vector<int>{4, 1}));
  EXPECT_EQ(update_aou(AoUState{{2, 5, 1}}, {false, false, false}).ages,
            (std::vector<int>{3, 6, 2}));
  EXPECT_EQ(update_aou(AoUState{{2, 5, 1}}, {true, true, true}).ages,
            (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(AoUState::initial(3).ages, (std::vector<int>{1, 1, 1}));
}

TEST(AoU, WeightExamples) {
  const auto w = aou_weights(AoUState{{1, 1, 2}});
  EXPECT_DOUBLE_EQ(w[0], 0.25);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
  EXPECT_DOUBLE_EQ(w[2], 0.5);
  for (double x : aou_weights(AoUState{{4, 4, 4, 4}})) EXPECT_DOUBLE_EQ(x, 0.25);
  const auto v = aou_weights(AoUState{{1, 9}});
  EXPECT_DOUBLE_EQ(v[0], 0.1);
  EXPECT_DOUBLE_EQ(v[1], 0.9);
}

TEST(Priority, Examples) {
  const std::vector<double> alpha{0.25, 0.25, 0.5};
  const std::vector<int> beta{100, 200, 50};
  EXPECT_EQ(priority_list(alpha, beta), (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(priority_list(std::vector<double>{1.0}, std::vector<int>{7}),
            (std::vector<int>{0}));
  EXPECT_EQ(priority_list(std::vector<double>{0.25, 0.25, 0.25, 0.25},
                          std::vector<int>{10, 10, 10, 10}),
            (std::vector<int>{0, 1, 2, 3}));
}

TEST(Priority, InvariantUnderAgeScaling) {
  Rng rng = RngStreams(3).stream("scaling");
  for (int trial = 0; trial < 100; ++trial) {
    AoUState s;
    std::vector<int> beta;
    for (int i = 0; i < 12; ++i) {
      s.ages.push_back(1 + static_cast<int>(draw_uniform(rng, 0, 10)));
      beta.push_back(1 + static_cast<int>(draw_uniform(rng, 0, 60)));
    }
    AoUState scaled = s;
    for (int& a : scaled.ages) a *= 7;
    EXPECT_EQ(priority_list(aou_weights(s), beta), priority_list(aou_weights(scaled), beta));
  }
}

TEST(SelectAoU, NoReplacementWhenEveryoneFits) {
  Cell c = make_cell({30, 20, 10, 40, 25, 5}, 3, {});
  const Follower f(c.config, c.devices, c.channels, {}, RngStreams(1).stream("x"));
  const std::vector<int> priority{3, 0, 4, 1, 2, 5};
  const SelectionOutcome out = select_devices_aou(
      priority, 3, [&](std::span<const int> s) { return f.play(s); });
  EXPECT_EQ(out.selected, (std::vector<int>{3, 0, 4}));
  EXPECT_EQ(out.replaced_count, 0);
  EXPECT_EQ(out.follower_calls, 1);
  EXPECT_TRUE(out.play.latency.dropped.empty());
}

TEST(SelectAoU, InfeasibleTopDeviceIsReplaced) {
  Cell c = make_cell({30, 20, 10, 40, 25, 5}, 3, {3});
  ASSERT_TRUE(is_infeasible_pair(c.devices[3], c.channels.gain(0, 3), c.config));
  const Follower f(c.config, c.devices, c.channels, {}, RngStreams(1).stream("x"));
  const std::vector<int> priority{3, 0, 4, 1, 2, 5};
  const SelectionOutcome out = select_devices_aou(
      priority, 3, [&](std::span<const int> s) { return f.play(s); });
  // Device 3 leaves its slot to the fourth list entry, device 1.
  EXPECT_EQ(out.selected, (std::vector<int>{1, 0, 4}));
  EXPECT_EQ(out.replaced_count, 1);
  EXPECT_EQ(out.follower_calls, 2);
  EXPECT_TRUE(out.play.latency.dropped.empty());
}

TEST(SelectAoU, ListExhaustedWhenNEqualsK) {
  Cell c = make_cell({30, 20, 10}, 3, {1});
  const Follower f(c.config, c.devices, c.channels, {}, RngStreams(1).stream("x"));
  const std::vector<int> priority{0, 1, 2};
  const SelectionOutcome out = select_devices_aou(
      priority, 3, [&](std::span<const int> s) { return f.play(s); });
  EXPECT_EQ(out.replaced_count, 0);
  EXPECT_EQ(out.play.latency.dropped.size(), 1u);
  EXPECT_EQ(out.play.selected[out.play.latency.dropped[0]], 1);
}

TEST(SelectAoU, ReplacementsBoundedAndCursorAdvances) {
  // Every other device is dead, so several rounds of replacement occur.
  Cell c = make_cell({9, 8, 7, 6, 5, 4, 3, 2, 1, 10}, 2, {0, 2, 4, 6, 8});
  const Follower f(c.config, c.devices, c.channels, {}, RngStreams(1).stream("x"));
  std::vector<int> priority(10);
  std::iota(priority.begin(), priority.end(), 0);
  const SelectionOutcome out = select_devices_aou(
      priority, 2, [&](std::span<const int> s) { return f.play(s); });
  EXPECT_LE(out.replaced_count, 10 - 2);
  std::vector<int> sorted = out.selected;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{1, 3}));
  EXPECT_TRUE(out.play.latency.dropped.empty());
}

TEST(SelectAoU, AllInfeasibleEndsWithEmptyParticipation) {
  Cell c = make_cell({3, 4, 5, 6}, 2, {0, 1, 2, 3});
  const Follower f(c.config, c.devices, c.channels, {}, RngStreams(1).stream("x"));
  const std::vector<int> priority{3, 2, 1, 0};
  const SelectionOutcome out = select_devices_aou(
      priority, 2, [&](std::span<const int> s) { return f.play(s); });
  EXPECT_FALSE(out.play.latency.latency_s.has_value());
  EXPECT_EQ(out.replaced_count, 2);
}

TEST(SelectRandom, DeterministicPerSeed) {
  Rng a = RngStreams(5).stream("scheme", 3);
  Rng b = RngStreams(5).stream("scheme", 3);
  const auto x = select_random(a, 20, 4);
  EXPECT_EQ(x, select_random(b, 20, 4));
  EXPECT_EQ(x.size(), 4u);
  EXPECT_TRUE(std::is_sorted(x.begin(), x.end()));
  EXPECT_EQ(std::adjacent_find(x.begin(), x.end()), x.end());
  for (int id : x) {
    EXPECT_GE(id, 0);
    EXPECT_LT(id, 20);
  }
}

TEST(SelectRandom, CoversAllDevices) {
  Rng rng = RngStreams(5).stream("coverage");
  std::vector<int> hits(10, 0);
  for (int i = 0; i < 2000; ++i) {
    for (int id : select_random(rng, 10, 3)) ++hits[id];
  }
  for (int h : hits) EXPECT_NEAR(h, 600, 120);
}

TEST(SelectCluster, AlternatesForEightAndFour) {
  Rng rng = RngStreams(2).stream("scheme-setup");
  const auto clusters = make_clusters(rng, 8, 4);
  ASSERT_EQ(clusters.size(), 2u);
  std::vector<int> all;
  for (const auto& c : clusters) {
    EXPECT_EQ(c.size(), 4u);
    all.insert(all.end(), c.begin(), c.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
  for (int t = 1; t <= 6; ++t) {
    EXPECT_EQ(select_cluster(t, clusters), clusters[(t - 1) % 2]);
  }
  EXPECT_NE(select_cluster(1, clusters), select_cluster(2, clusters));
  EXPECT_THROW(make_clusters(rng, 10, 4), std::invalid_argument);
}

TEST(SelectFixed, SameSetEveryRound) {
  const std::vector<int> set{2, 5, 7};
  EXPECT_EQ(select_fixed(set), set);
  EXPECT_EQ(select_fixed(set), select_fixed(set));
}
