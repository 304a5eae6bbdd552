#include "fedsched/device_selector.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fedsched {

AoUState update_aou(const AoUState& state,
                    const std::vector<bool>& participated) {
  if (participated.size() != state.ages.size()) {
    throw std::invalid_argument("update_aou: flag count differs from devices");
  }
  AoUState next = state;
  for (std::size_t n = 0; n < next.ages.size(); ++n) {
    next.ages[n] = participated[n] ? 1 : next.ages[n] + 1;
  }
  return next;
}

std::vector<double> aou_weights(const AoUState& state) {
  const double total =
      std::accumulate(state.ages.begin(), state.ages.end(), 0.0);
  std::vector<double> w;
  w.reserve(state.ages.size());
  for (int a : state.ages) w.push_back(a / total);
  return w;
}

std::vector<int> priority_list(std::span<const double> weights,
                               std::span<const int> samples) {
  if (weights.size() != samples.size()) {
    throw std::invalid_argument("priority_list: length mismatch");
  }
  std::vector<int> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return weights[a] * samples[a] > weights[b] * samples[b];
  });
  return order;
}

SelectionOutcome select_devices_aou(std::span<const int> priority, int K,
                                    const FollowerFn& follower) {
  if (K < 1 || static_cast<std::size_t>(K) > priority.size()) {
    throw std::invalid_argument("select_devices_aou: need 1 <= K <= N");
  }
  SelectionOutcome out;
  out.selected.assign(priority.begin(), priority.begin() + K);
  std::size_t cursor = static_cast<std::size_t>(K);

  for (;;) {
    out.play = follower(out.selected);
    ++out.follower_calls;
    if (out.play.latency.dropped.empty() || cursor == priority.size()) break;
    for (int slot : out.play.latency.dropped) {
      if (cursor == priority.size()) break;
      out.selected[slot] = priority[cursor++];
      ++out.replaced_count;
    }
  }
  return out;
}

std::vector<int> select_random(Rng& rng, int num_devices, int K) {
  if (K > num_devices) throw std::invalid_argument("select_random: K > N");
  std::vector<int> ids(static_cast<std::size_t>(num_devices));
  std::iota(ids.begin(), ids.end(), 0);
  // Partial Fisher-Yates: the first K positions form the sample.
  for (int i = 0; i < K; ++i) {
    const int span = num_devices - i;
    const int j = i + std::min(span - 1, static_cast<int>(draw_uniform(rng, 0.0, span)));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(K));
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::vector<int>> make_clusters(Rng& rng, int num_devices, int K) {
  if (K < 1 || num_devices % K != 0) {
    throw std::invalid_argument("make_clusters: N must be a multiple of K");
  }
  std::vector<int> order(static_cast<std::size_t>(num_devices));
  std::iota(order.begin(), order.end(), 0);
  for (int i = num_devices - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(draw_uniform(rng, 0.0, i + 1.0)));
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<int>> clusters;
  for (int c = 0; c < num_devices / K; ++c) {
    std::vector<int> members(order.begin() + c * K, order.begin() + (c + 1) * K);
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  return clusters;
}

std::vector<int> select_cluster(int round,
                                const std::vector<std::vector<int>>& clusters) {
  if (clusters.empty()) throw std::invalid_argument("select_cluster: no clusters");
  const auto c = static_cast<std::size_t>(round - 1) % clusters.size();
  return clusters[c];
}

std::vector<int> select_fixed(const std::vector<int>& fixed_set) {
  return fixed_set;
}

}  // namespace fedsched
