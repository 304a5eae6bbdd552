#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fedsched/system_model.hpp"

namespace fedsched {

struct AllocationPoint {
  double tau = 1.0;
  double p = 1.0;

  friend bool operator==(const AllocationPoint&, const AllocationPoint&) =
      default;
};

enum class AllocationStatus { kFeasible, kInfeasible };

struct AllocationResult {
  AllocationPoint point;
  double time_s = 0.0;
  double energy_j = 0.0;
  AllocationStatus status = AllocationStatus::kInfeasible;
  int iterations = 0;

  bool feasible() const { return status == AllocationStatus::kFeasible; }
};

// Energy slack below which a point counts as meeting the budget.
inline constexpr double kEnergyTolerance = 1e-9;

struct PolyblockOptions {
  // Stop once consecutive selected projections differ by at most
  // eps * max(1, T) and no active vertex bounds the objective more than that
  // above the incumbent, T being the incumbent latency in seconds.
  double eps = 0.01;
  // Drop vertices whose corner cannot beat the incumbent.
  bool prune = true;
  int max_iterations = 10000;
  double zeta_tolerance = 1e-10;
  int max_bisection_steps = 200;
};

// Maximization form of the per-pair latency problem: f(z) = -(T_cp + T_cm).
double objective(const LinkModel& link, AllocationPoint z);

// g(z) = E_cp + E_cm - E_max; z is feasible iff g(z) <= 0.
double constraint(const LinkModel& link, AllocationPoint z);

// Largest zeta in (0, 1] with along_ray(zeta) <= 0, for an increasing
// function with along_ray(0+) < 0. Returns 1 when along_ray(1) <= 0.
double bisect_ray(const std::function<double(double)>& along_ray,
                  double tolerance, int max_steps);

struct Projection {
  double zeta = 1.0;
  AllocationPoint point;
};

// Projection of a vertex onto the upper boundary of the feasible set along
// the ray from the origin. Throws std::domain_error when the ray holds no
// feasible point, which happens exactly for infeasible pairs.
Projection project(const LinkModel& link, AllocationPoint vertex,
                   const PolyblockOptions& options = {});

// Snapshot handed to an observer after each vertex split.
struct PolyblockIterate {
  int iteration = 0;
  double selected_objective = 0.0;  // best projection among active vertices
  double best_objective = 0.0;      // incumbent so far
  double upper_bound = 0.0;         // max f over active vertex corners
  std::span<const AllocationPoint> vertices;
  int pruned_total = 0;
};

using PolyblockObserver = std::function<void(const PolyblockIterate&)>;

// Global minimizer of T(tau, p) subject to the energy budget, by polyblock
// outer approximation over the box (0, 1]^2.
AllocationResult solve_allocation(const LinkModel& link,
                                  const PolyblockOptions& options = {},
                                  const PolyblockObserver& observer = {});

AllocationResult solve_allocation(const SystemConfig& config,
                                  const Device& device, double gain,
                                  const PolyblockOptions& options = {});

// Evaluates a fixed (tau, p); infeasible when it exceeds the energy budget.
AllocationResult fixed_allocation(const LinkModel& link, AllocationPoint z);

// Minimal round time for every (sub-channel, selected device) pair.
// Rows are sub-channels, columns index into the selected device list.
class GammaMatrix {
 public:
  GammaMatrix() = default;
  GammaMatrix(int num_subchannels, int num_selected)
      : rows_(num_subchannels),
        cols_(num_selected),
        entries_(static_cast<std::size_t>(num_subchannels) * num_selected) {}

  int num_subchannels() const { return rows_; }
  int num_selected() const { return cols_; }

  const AllocationResult& at(int subchannel, int slot) const {
    return entries_[static_cast<std::size_t>(subchannel) * cols_ + slot];
  }
  AllocationResult& at(int subchannel, int slot) {
    return entries_[static_cast<std::size_t>(subchannel) * cols_ + slot];
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<AllocationResult> entries_;
};

GammaMatrix build_gamma(const SystemConfig& config,
                        std::span<const Device> devices,
                        std::span<const int> selected,
                        const ChannelMatrix& channels,
                        const PolyblockOptions& options = {});

}  // namespace fedsched
