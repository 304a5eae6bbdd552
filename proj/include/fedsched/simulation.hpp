#pragma once

#include <vector>

#include "fedsched/config.hpp"
#include "fedsched/device_selector.hpp"
#include "fedsched/fl_engine.hpp"
#include "fedsched/follower.hpp"
#include "fedsched/rng.hpp"
#include "fedsched/system_model.hpp"

namespace fedsched {

struct DeviceRound {
  bool selected = false;
  bool participated = false;
  int channel = -1;  // -1 unless the device uploaded
  double gain = 0.0;
  double tau = 0.0;
  double p = 0.0;
  double time_s = 0.0;
  double energy_j = 0.0;
  int aou = 1;  // age used for this round's selection
};

struct RoundRecord {
  int round = 0;
  SelectionScheme scheme = SelectionScheme::kAoU;
  std::vector<int> selected;  // device ids by slot of the final selection
  std::vector<int> dropped;   // selected device ids left without a channel
  std::vector<DeviceRound> devices;
  double latency_s = 0.0;     // max participant time, 0 for an empty round
  int participants = 0;
  int replaced = 0;
  bool carried_over = false;  // no participant, global model unchanged
  double global_loss = 0.0;   // after this round's aggregation
  double grad_norm_sq = 0.0;  // |grad F|^2 at the round's starting model
  double gradient_ratio = 0.0;
  double bound = 0.0;         // NaN unless bound tracking is on
  double cumulative_time_s = 0.0;

  std::vector<bool> participated() const;
  std::vector<int> ages() const;
};

struct RunSummary {
  SimulationConfig config;
  std::vector<RoundRecord> rounds;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double cumulative_time_s = 0.0;
  double learning_rate = 0.0;
  LearnerConstants constants;
  // bound[t] limits F(w) - F* after t rounds; empty unless tracked.
  std::vector<double> bound;
};

// One federated training run over the simulated wireless cell.
//
// Each round draws fresh channels, lets the leader pick devices (running the
// follower on candidate sets where the scheme calls for it), trains on the
// devices the follower could serve, aggregates and ages everyone else.
class Simulation {
 public:
  explicit Simulation(SimulationConfig config);

  RoundRecord run_round();

  // Runs the remaining configured rounds and returns the summary.
  RunSummary run();

  // Summary of the rounds run so far, with the convergence bound attached.
  RunSummary summary() const;

  const SimulationConfig& config() const { return config_; }
  const std::vector<Device>& devices() const { return devices_; }
  const Partition& partition() const { return partition_; }
  const LearnerConstants& constants() const { return constants_; }
  const LearningTask& task() const { return task_; }
  const Model& model() const { return model_; }
  const AoUState& aou() const { return aou_; }
  double learning_rate() const { return learning_rate_; }
  int rounds_done() const { return static_cast<int>(records_.size()); }
  const std::vector<int>& fixed_set() const { return fixed_set_; }
  const std::vector<std::vector<int>>& clusters() const { return clusters_; }

  // Channel realization of round t; identical on every call.
  ChannelMatrix channels(int round) const;

  FollowerSettings follower_settings() const;

  // Re-solves the follower problem of a recorded round on its final
  // selection.
  FollowerPlay replay_follower(const RoundRecord& record) const;

 private:
  SimulationConfig config_;
  RngStreams streams_;
  LearningTask task_;
  Partition partition_;
  std::vector<int> samples_;
  std::vector<Device> devices_;
  LearnerConstants constants_;
  double learning_rate_ = 0.0;
  std::vector<int> fixed_set_;
  std::vector<std::vector<int>> clusters_;

  Model model_;
  double initial_loss_ = 0.0;
  AoUState aou_;
  std::vector<RoundRecord> records_;
};

RunSummary run_simulation(const SimulationConfig& config);

}  // namespace fedsched
