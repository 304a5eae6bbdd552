#include "fedsched/follower.hpp"

#include <stdexcept>

namespace fedsched {

Follower::Follower(const SystemConfig& config, std::span<const Device> devices,
                   const ChannelMatrix& channels, FollowerSettings settings,
                   Rng assignment_rng)
    : config_(config),
      devices_(devices),
      channels_(channels),
      settings_(settings),
      assignment_rng_(assignment_rng),
      cache_(static_cast<std::size_t>(channels.num_subchannels) *
             devices.size()) {}

const AllocationResult& Follower::pair(int subchannel, int device) const {
  auto& slot = cache_[static_cast<std::size_t>(subchannel) * devices_.size() +
                      static_cast<std::size_t>(device)];
  if (!slot) {
    const Device& d = devices_[device];
    const double gain = channels_.gain(subchannel, device);
    if (settings_.allocation == AllocationMode::kMonotonic) {
      slot = solve_allocation(config_, d, gain, settings_.polyblock);
    } else {
      slot = fixed_allocation(LinkModel(config_, d, gain), settings_.fixed_point);
    }
    ++solved_;
  }
  return *slot;
}

FollowerPlay Follower::play(std::span<const int> selected) const {
  const int size = static_cast<int>(selected.size());
  if (size != channels_.num_subchannels) {
    throw std::invalid_argument(
        "Follower::play: selected set must match the sub-channel count");
  }
  FollowerPlay out;
  out.selected.assign(selected.begin(), selected.end());
  out.gamma = GammaMatrix(size, size);
  for (int k = 0; k < size; ++k) {
    for (int j = 0; j < size; ++j) out.gamma.at(k, j) = pair(k, selected[j]);
  }
  out.table = UtilityTable::from_gamma(out.gamma);

  Rng rng = assignment_rng_;
  if (settings_.assignment == AssignmentMode::kRandom) {
    out.match = MatchResult{random_matching(rng, size), {}, 0};
  } else {
    Matching initial = settings_.initial == InitialMatching::kRandom
                           ? random_matching(rng, size)
                           : identity_matching(size);
    out.match = stable_match(out.table, std::move(initial));
  }
  out.latency = matching_latency(out.match.matching, out.table);
  return out;
}

}  // namespace fedsched
