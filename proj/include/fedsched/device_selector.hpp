#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fedsched/follower.hpp"
#include "fedsched/rng.hpp"

namespace fedsched {

// Age of update per device: rounds since its last successful upload.
struct AoUState {
  std::vector<int> ages;

  static AoUState initial(int num_devices) {
    return AoUState{std::vector<int>(static_cast<std::size_t>(num_devices), 1)};
  }
};

// participated[n] must be set only for devices that were selected and held a
// feasible sub-channel. Those reset to 1, every other age grows by one.
AoUState update_aou(const AoUState& state,
                    const std::vector<bool>& participated);

// alpha_n = A_n / sum_i A_i.
std::vector<double> aou_weights(const AoUState& state);

// Device ids by descending alpha_n * beta_n; ties go to the lower id.
std::vector<int> priority_list(std::span<const double> weights,
                               std::span<const int> samples);

using FollowerFn = std::function<FollowerPlay(std::span<const int>)>;

struct SelectionOutcome {
  std::vector<int> selected;
  FollowerPlay play;  // follower response to the final selected set
  int replaced_count = 0;
  int follower_calls = 0;
};

// Leader-side selection: start from the top K of the priority list and keep
// replacing devices the follower could not assign with the next unselected
// entries until everyone is assigned or the list runs out.
SelectionOutcome select_devices_aou(std::span<const int> priority, int K,
                                    const FollowerFn& follower);

std::vector<int> select_random(Rng& rng, int num_devices, int K);

// Random partition of the devices into num_devices / K clusters of size K.
std::vector<std::vector<int>> make_clusters(Rng& rng, int num_devices, int K);

// Round t (1-based) serves cluster (t - 1) mod C.
std::vector<int> select_cluster(int round,
                                const std::vector<std::vector<int>>& clusters);

std::vector<int> select_fixed(const std::vector<int>& fixed_set);

}  // namespace fedsched
