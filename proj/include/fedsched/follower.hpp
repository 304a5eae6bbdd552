#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fedsched/channel_matcher.hpp"
#include "fedsched/resource_allocator.hpp"
#include "fedsched/system_model.hpp"

namespace fedsched {

enum class AllocationMode { kMonotonic, kFixed };      // polyblock or tau = p = const
enum class AssignmentMode { kMatching, kRandom };      // swap matching or random
enum class InitialMatching { kIdentity, kRandom };

struct FollowerSettings {
  AllocationMode allocation = AllocationMode::kMonotonic;
  AssignmentMode assignment = AssignmentMode::kMatching;
  InitialMatching initial = InitialMatching::kIdentity;
  PolyblockOptions polyblock;
  AllocationPoint fixed_point{0.5, 0.5};
};

// The follower's response to one selected set: per-pair allocations,
// the resulting utilities and the sub-channel assignment.
struct FollowerPlay {
  std::vector<int> selected;  // device ids, indexed by slot
  GammaMatrix gamma;
  UtilityTable table;
  MatchResult match;
  LatencyReport latency;

  int size() const { return static_cast<int>(selected.size()); }
  int channel_of(int slot) const { return match.matching.channel_of(slot); }
  bool participates(int slot) const {
    return utility(match.matching, slot, table) < kUtilityMax;
  }
  const AllocationResult& allocation(int slot) const {
    return gamma.at(channel_of(slot), slot);
  }
};

// Latency-minimizing follower for one round's channel realization.
//
// Per-pair solutions do not depend on which other devices were selected, so
// they are cached across repeated calls within the round. Every call starts
// the assignment from the same random state, making play() a pure function
// of the selected set.
class Follower {
 public:
  Follower(const SystemConfig& config, std::span<const Device> devices,
           const ChannelMatrix& channels, FollowerSettings settings,
           Rng assignment_rng);

  FollowerPlay play(std::span<const int> selected) const;

  // Number of distinct (sub-channel, device) pairs solved so far.
  int solved_pairs() const { return solved_; }

 private:
  const AllocationResult& pair(int subchannel, int device) const;

  const SystemConfig& config_;
  std::span<const Device> devices_;
  const ChannelMatrix& channels_;
  FollowerSettings settings_;
  Rng assignment_rng_;
  mutable std::vector<std::optional<AllocationResult>> cache_;
  mutable int solved_ = 0;
};

}  // namespace fedsched
