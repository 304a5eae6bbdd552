#include "fedsched/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fedsched {

std::vector<bool> RoundRecord::participated() const {
  std::vector<bool> out;
  out.reserve(devices.size());
  for (const DeviceRound& d : devices) out.push_back(d.participated);
  return out;
}

std::vector<int> RoundRecord::ages() const {
  std::vector<int> out;
  out.reserve(devices.size());
  for (const DeviceRound& d : devices) out.push_back(d.aou);
  return out;
}

Simulation::Simulation(SimulationConfig config)
    : config_(std::move(config)), streams_(config_.run.seed) {
  config_.resolve();
  config_.validate();
  const SystemConfig& sys = config_.system;

  task_ = {config_.task.kind, config_.task.regularization};
  Rng partition_rng = streams_.stream("partition");
  partition_ = partition_data(partition_rng, sys.num_devices,
                              config_.task.total_samples, config_.task.dim,
                              config_.task.kind, config_.task.label_noise);
  samples_ = partition_.sample_counts();

  Rng placement_rng = streams_.stream("placement");
  devices_ = place_devices(placement_rng, sys, samples_);

  constants_ = learner_constants(task_, partition_.devices);
  learning_rate_ =
      config_.task.learning_rate.value_or(1.0 / constants_.lipschitz);

  Rng setup_rng = streams_.stream("scheme-setup");
  if (config_.scheme.selection == SelectionScheme::kFixed) {
    fixed_set_ = select_random(setup_rng, sys.num_devices, sys.num_subchannels);
  } else if (config_.scheme.selection == SelectionScheme::kCluster) {
    clusters_ = make_clusters(setup_rng, sys.num_devices, sys.num_subchannels);
  }

  model_ = Model::Zero(config_.task.dim);
  initial_loss_ = global_loss(task_, model_, partition_.devices);
  aou_ = AoUState::initial(sys.num_devices);
}

ChannelMatrix Simulation::channels(int round) const {
  Rng rng = streams_.stream("channel", static_cast<std::uint64_t>(round));
  return draw_channels(rng, config_.system, devices_, round);
}

FollowerSettings Simulation::follower_settings() const {
  FollowerSettings s;
  s.allocation = config_.scheme.allocation;
  s.assignment = config_.scheme.assignment;
  s.initial = config_.scheme.initial;
  s.polyblock.eps = config_.system.error_tolerance;
  return s;
}

FollowerPlay Simulation::replay_follower(const RoundRecord& record) const {
  const ChannelMatrix ch = channels(record.round);
  Follower follower(config_.system, devices_, ch, follower_settings(),
                    streams_.stream("matcher-init",
                                    static_cast<std::uint64_t>(record.round)));
  return follower.play(record.selected);
}

RoundRecord Simulation::run_round() {
  const SystemConfig& sys = config_.system;
  const int t = rounds_done() + 1;
  const int N = sys.num_devices;
  const int K = sys.num_subchannels;

  RoundRecord rec;
  rec.round = t;
  rec.scheme = config_.scheme.selection;
  rec.devices.resize(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) rec.devices[n].aou = aou_.ages[n];

  // Follower: resource allocation and sub-channel assignment.
  const ChannelMatrix ch = channels(t);
  Follower follower(sys, devices_, ch, follower_settings(),
                    streams_.stream("matcher-init", static_cast<std::uint64_t>(t)));

  // Leader: device selection.
  FollowerPlay play;
  switch (config_.scheme.selection) {
    case SelectionScheme::kAoU: {
      const std::vector<int> order =
          priority_list(aou_weights(aou_), samples_);
      SelectionOutcome outcome = select_devices_aou(
          order, K, [&](std::span<const int> s) { return follower.play(s); });
      play = std::move(outcome.play);
      rec.replaced = outcome.replaced_count;
      break;
    }
    case SelectionScheme::kRandom: {
      Rng rng = streams_.stream("scheme", static_cast<std::uint64_t>(t));
      play = follower.play(select_random(rng, N, K));
      break;
    }
    case SelectionScheme::kCluster:
      play = follower.play(select_cluster(t, clusters_));
      break;
    case SelectionScheme::kFixed:
      play = follower.play(select_fixed(fixed_set_));
      break;
  }

  rec.selected = play.selected;
  std::vector<bool> participating(static_cast<std::size_t>(N), false);
  for (int slot = 0; slot < play.size(); ++slot) {
    const int id = play.selected[slot];
    DeviceRound& d = rec.devices[id];
    d.selected = true;
    if (!play.participates(slot)) {
      rec.dropped.push_back(id);
      continue;
    }
    const AllocationResult& a = play.allocation(slot);
    d.participated = true;
    d.channel = play.channel_of(slot);
    d.gain = ch.gain(d.channel, id);
    d.tau = a.point.tau;
    d.p = a.point.p;
    d.time_s = a.time_s;
    d.energy_j = a.energy_j;
    participating[id] = true;
    ++rec.participants;
    rec.latency_s = std::max(rec.latency_s, a.time_s);
  }

  // Learning: local steps on the participants, then weighted averaging.
  rec.grad_norm_sq =
      global_gradient(task_, model_, partition_.devices).squaredNorm();
  if (config_.run.track_bound) {
    rec.gradient_ratio = gradient_ratio(task_, model_, partition_.devices);
  }
  std::vector<Model> locals(static_cast<std::size_t>(N), model_);
  for (int n = 0; n < N; ++n) {
    if (participating[n]) {
      locals[n] = local_update(task_, model_, partition_.devices[n],
                               learning_rate_);
    }
  }
  if (auto next = aggregate(locals, samples_, participating)) {
    model_ = std::move(*next);
  } else {
    rec.carried_over = true;
  }
  rec.global_loss = global_loss(task_, model_, partition_.devices);
  rec.cumulative_time_s =
      (records_.empty() ? 0.0 : records_.back().cumulative_time_s) +
      rec.latency_s;
  rec.bound = std::numeric_limits<double>::quiet_NaN();

  aou_ = update_aou(aou_, participating);
  records_.push_back(rec);
  return rec;
}

RunSummary Simulation::run() {
  while (rounds_done() < config_.run.rounds) run_round();
  return summary();
}

RunSummary Simulation::summary() const {
  RunSummary s;
  s.config = config_;
  s.rounds = records_;
  s.initial_loss = initial_loss_;
  s.final_loss = records_.empty() ? initial_loss_ : records_.back().global_loss;
  s.cumulative_time_s =
      records_.empty() ? 0.0 : records_.back().cumulative_time_s;
  s.learning_rate = learning_rate_;
  s.constants = constants_;

  if (config_.run.track_bound) {
    double rho = 0.0;
    std::vector<BoundRound> trace;
    trace.reserve(records_.size());
    for (const RoundRecord& r : records_) {
      rho = std::max(rho, r.gradient_ratio);
      trace.push_back({r.grad_norm_sq, r.participated()});
    }
    s.constants.rho = rho;
    s.bound = convergence_bound(initial_loss_ - constants_.optimal_loss, trace,
                                s.constants, samples_);
    for (std::size_t t = 0; t < s.rounds.size(); ++t) {
      s.rounds[t].bound = s.bound[t + 1];
    }
  }
  return s;
}

RunSummary run_simulation(const SimulationConfig& config) {
  Simulation sim(config);
  return sim.run();
}

}  // namespace fedsched
