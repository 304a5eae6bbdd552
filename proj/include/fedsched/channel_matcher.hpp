#pragma once

#include <optional>
#include <vector>

#include "fedsched/resource_allocator.hpp"
#include "fedsched/rng.hpp"

namespace fedsched {

// Utility of an infeasible (sub-channel, device) combination.
inline constexpr double kUtilityMax = 1e12;

// Square table of utilities: rows are sub-channels, columns are the selected
// devices (by slot). Lower is better.
class UtilityTable {
 public:
  UtilityTable() = default;
  explicit UtilityTable(int size)
      : size_(size), values_(static_cast<std::size_t>(size) * size, kUtilityMax) {}
  UtilityTable(int size, std::vector<double> row_major);

  // Feasible entries take their minimal time, infeasible ones kUtilityMax.
  // Throws if kUtilityMax does not exceed 1e3 x the largest feasible entry.
  static UtilityTable from_gamma(const GammaMatrix& gamma);

  int size() const { return size_; }
  double at(int subchannel, int device) const {
    return values_[static_cast<std::size_t>(subchannel) * size_ + device];
  }
  double& at(int subchannel, int device) {
    return values_[static_cast<std::size_t>(subchannel) * size_ + device];
  }

 private:
  int size_ = 0;
  std::vector<double> values_;
};

// One-to-one assignment of device slots to sub-channels.
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::vector<int> channel_of_device);

  int size() const { return static_cast<int>(channel_of_.size()); }
  int channel_of(int device) const { return channel_of_[device]; }
  int device_on(int subchannel) const { return device_on_[subchannel]; }
  const std::vector<int>& channels() const { return channel_of_; }

  void swap_devices(int a, int b);

  friend bool operator==(const Matching& x, const Matching& y) {
    return x.channel_of_ == y.channel_of_;
  }

 private:
  std::vector<int> channel_of_;
  std::vector<int> device_on_;
};

Matching identity_matching(int size);
Matching random_matching(Rng& rng, int size);

double utility(const Matching& matching, int device, const UtilityTable& table);

// A sub-channel inherits the utility of the device occupying it.
double channel_utility(const Matching& matching, int subchannel,
                       const UtilityTable& table);

// (a, b) blocks if exchanging their sub-channels makes neither worse off and
// at least one strictly better off.
bool is_swap_blocking(const Matching& matching, int a, int b,
                      const UtilityTable& table);

struct SwapEvent {
  int first = 0;
  int second = 0;
  double first_before = 0.0;
  double second_before = 0.0;
  double first_after = 0.0;
  double second_after = 0.0;
};

struct MatchResult {
  Matching matching;
  std::vector<SwapEvent> swaps;
  int sweeps = 0;
};

// Executes swap-blocking exchanges until a full sweep finds none. Devices
// propose in ascending slot order, partners are tried in ascending order,
// and the first blocking pair found is applied at once.
MatchResult stable_match(const UtilityTable& table, Matching initial);

// True iff no pair of devices is swap-blocking.
bool verify_2es(const Matching& matching, const UtilityTable& table);

struct LatencyReport {
  std::optional<double> latency_s;  // empty when every device is dropped
  std::vector<int> assigned;        // device slots with feasible utility
  std::vector<int> dropped;         // device slots stuck at kUtilityMax
};

LatencyReport matching_latency(const Matching& matching,
                               const UtilityTable& table);

}  // namespace fedsched
