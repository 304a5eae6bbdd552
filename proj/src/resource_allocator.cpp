#include "fedsched/resource_allocator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fedsched {

double objective(const LinkModel& link, AllocationPoint z) {
  return -link.time(z.tau, z.p);
}

double constraint(const LinkModel& link, AllocationPoint z) {
  return link.energy(z.tau, z.p) - link.energy_budget();
}

double bisect_ray(const std::function<double(double)>& along_ray,
                  double tolerance, int max_steps) {
  if (along_ray(1.0) <= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int step = 0; step < max_steps && hi - lo > tolerance; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (along_ray(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // lo is always on the feasible side.
  return lo;
}

Projection project(const LinkModel& link, AllocationPoint vertex,
                   const PolyblockOptions& options) {
  if (!(link.min_comm_energy() < link.energy_budget())) {
    throw std::domain_error("project: no feasible point on the ray");
  }
  const double zeta = bisect_ray(
      [&](double s) {
        return constraint(link, {s * vertex.tau, s * vertex.p});
      },
      options.zeta_tolerance, options.max_bisection_steps);
  if (!(zeta > 0.0)) {
    throw std::domain_error("project: feasible part of the ray is below tolerance");
  }
  return {zeta, {zeta * vertex.tau, zeta * vertex.p}};
}

namespace {

AllocationResult make_result(const LinkModel& link, AllocationPoint z,
                             int iterations) {
  AllocationResult r;
  r.point = z;
  r.time_s = link.time(z.tau, z.p);
  r.energy_j = link.energy(z.tau, z.p);
  r.status = AllocationStatus::kFeasible;
  r.iterations = iterations;
  return r;
}

AllocationResult infeasible_result() {
  AllocationResult r;
  r.point = {0.0, 0.0};
  r.time_s = std::numeric_limits<double>::infinity();
  r.energy_j = std::numeric_limits<double>::infinity();
  r.status = AllocationStatus::kInfeasible;
  return r;
}

struct Vertex {
  AllocationPoint corner;
  AllocationPoint projection;
  double value;        // f(projection), attained
  double upper_bound;  // f(corner), bounds f over the box [0, corner]
};

std::size_t argmax(const std::vector<Vertex>& vertices,
                   double Vertex::*field) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (vertices[i].*field > vertices[best].*field) best = i;
  }
  return best;
}

}  // namespace

AllocationResult solve_allocation(const LinkModel& link,
                                  const PolyblockOptions& options,
                                  const PolyblockObserver& observer) {
  if (link.min_comm_energy() >= link.energy_budget() ||
      constraint(link, {kDomainFloor, kDomainFloor}) > 0.0) {
    return infeasible_result();
  }

  const AllocationPoint top{1.0, 1.0};
  if (constraint(link, top) <= 0.0) {
    return make_result(link, top, 0);
  }

  auto make_vertex = [&](AllocationPoint corner) {
    const Projection proj = project(link, corner, options);
    return Vertex{corner, proj.point, objective(link, proj.point),
                  objective(link, corner)};
  };

  std::vector<Vertex> vertices{make_vertex(top)};
  std::vector<AllocationPoint> corners;
  std::size_t selected = 0;
  Vertex best = vertices.front();
  double previous = best.value;
  int pruned_total = 0;

  for (int iteration = 1;; ++iteration) {
    if (iteration > options.max_iterations) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "solve_allocation: no convergence after " << options.max_iterations
          << " iterations (gain " << link.gain() << ", budget "
          << link.energy_budget() << " J, computation "
          << link.comp_time(1.0) << " s at full share)";
      throw std::runtime_error(msg.str());
    }

    // Replace the selected vertex by its two shrunken copies.
    const Vertex v = vertices[selected];
    vertices.erase(vertices.begin() + static_cast<std::ptrdiff_t>(selected));
    vertices.push_back(make_vertex({v.projection.tau, v.corner.p}));
    vertices.push_back(make_vertex({v.corner.tau, v.projection.p}));

    std::size_t by_projection = argmax(vertices, &Vertex::value);
    const double current = vertices[by_projection].value;
    if (current > best.value) best = vertices[by_projection];

    if (options.prune) {
      // A box whose corner cannot beat the incumbent holds nothing better.
      const double cutoff = best.value;
      const std::size_t before = vertices.size();
      std::erase_if(vertices,
                    [&](const Vertex& x) { return x.upper_bound <= cutoff; });
      pruned_total += static_cast<int>(before - vertices.size());
    }

    const double upper =
        vertices.empty() ? best.value
                         : vertices[argmax(vertices, &Vertex::upper_bound)]
                               .upper_bound;

    if (observer) {
      corners.clear();
      for (const Vertex& x : vertices) corners.push_back(x.corner);
      observer({iteration, current, best.value, upper, corners, pruned_total});
    }

    // Seconds for sub-second latencies, relative beyond. Pairs just above the
    // infeasibility threshold have latencies in the thousands of seconds.
    const double tolerance = options.eps * std::max(1.0, std::abs(best.value));
    const bool settled = std::abs(current - previous) <= tolerance;
    const bool certified = upper - best.value <= tolerance;
    if ((settled && certified) || vertices.empty()) {
      return make_result(link, best.projection, iteration);
    }
    previous = current;
    // Follow the best projection while it still moves; once it settles
    // without a certificate, refine the box with the loosest bound.
    selected = settled ? argmax(vertices, &Vertex::upper_bound)
                       : argmax(vertices, &Vertex::value);
  }
}

AllocationResult solve_allocation(const SystemConfig& config,
                                  const Device& device, double gain,
                                  const PolyblockOptions& options) {
  if (is_infeasible_pair(device, gain, config)) return infeasible_result();
  return solve_allocation(LinkModel(config, device, gain), options);
}

AllocationResult fixed_allocation(const LinkModel& link, AllocationPoint z) {
  if (constraint(link, z) > kEnergyTolerance) return infeasible_result();
  return make_result(link, z, 0);
}

GammaMatrix build_gamma(const SystemConfig& config,
                        std::span<const Device> devices,
                        std::span<const int> selected,
                        const ChannelMatrix& channels,
                        const PolyblockOptions& options) {
  GammaMatrix gamma(channels.num_subchannels, static_cast<int>(selected.size()));
  for (int k = 0; k < channels.num_subchannels; ++k) {
    for (std::size_t j = 0; j < selected.size(); ++j) {
      const Device& d = devices[selected[j]];
      gamma.at(k, static_cast<int>(j)) =
          solve_allocation(config, d, channels.gain(k, d.id), options);
    }
  }
  return gamma;
}

}  // namespace fedsched
