#include "fedsched/channel_matcher.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fedsched {

UtilityTable::UtilityTable(int size, std::vector<double> row_major)
    : size_(size), values_(std::move(row_major)) {
  if (values_.size() != static_cast<std::size_t>(size) * size) {
    throw std::invalid_argument("UtilityTable: expected a square table");
  }
}

UtilityTable UtilityTable::from_gamma(const GammaMatrix& gamma) {
  if (gamma.num_subchannels() != gamma.num_selected()) {
    throw std::invalid_argument(
        "UtilityTable: sub-channel and device counts differ");
  }
  UtilityTable table(gamma.num_subchannels());
  double largest = 0.0;
  for (int k = 0; k < table.size(); ++k) {
    for (int j = 0; j < table.size(); ++j) {
      const AllocationResult& r = gamma.at(k, j);
      if (r.feasible()) {
        table.at(k, j) = r.time_s;
        largest = std::max(largest, r.time_s);
      }
    }
  }
  if (!(kUtilityMax > 1e3 * largest)) {
    throw std::runtime_error("UtilityTable: sentinel does not dominate Gamma");
  }
  return table;
}

Matching::Matching(std::vector<int> channel_of_device)
    : channel_of_(std::move(channel_of_device)),
      device_on_(channel_of_.size(), -1) {
  for (int n = 0; n < size(); ++n) {
    const int k = channel_of_[n];
    if (k < 0 || k >= size() || device_on_[k] != -1) {
      throw std::invalid_argument("Matching: not a bijection");
    }
    device_on_[k] = n;
  }
}

void Matching::swap_devices(int a, int b) {
  std::swap(channel_of_[a], channel_of_[b]);
  device_on_[channel_of_[a]] = a;
  device_on_[channel_of_[b]] = b;
}

Matching identity_matching(int size) {
  std::vector<int> c(static_cast<std::size_t>(size));
  std::iota(c.begin(), c.end(), 0);
  return Matching(std::move(c));
}

Matching random_matching(Rng& rng, int size) {
  std::vector<int> c(static_cast<std::size_t>(size));
  std::iota(c.begin(), c.end(), 0);
  // Fisher-Yates with our own uniform draw for cross-library stability.
  for (int i = size - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(draw_uniform(rng, 0.0, i + 1.0)));
    std::swap(c[i], c[j]);
  }
  return Matching(std::move(c));
}

double utility(const Matching& matching, int device, const UtilityTable& table) {
  return table.at(matching.channel_of(device), device);
}

double channel_utility(const Matching& matching, int subchannel,
                       const UtilityTable& table) {
  return utility(matching, matching.device_on(subchannel), table);
}

bool is_swap_blocking(const Matching& matching, int a, int b,
                      const UtilityTable& table) {
  const double ua = utility(matching, a, table);
  const double ub = utility(matching, b, table);
  const double ua_swapped = table.at(matching.channel_of(b), a);
  const double ub_swapped = table.at(matching.channel_of(a), b);
  return ua_swapped <= ua && ub_swapped <= ub &&
         (ua_swapped < ua || ub_swapped < ub);
}

MatchResult stable_match(const UtilityTable& table, Matching initial) {
  if (initial.size() != table.size()) {
    throw std::invalid_argument("stable_match: matching and table sizes differ");
  }
  MatchResult result{std::move(initial), {}, 0};
  Matching& m = result.matching;
  const int size = m.size();
  bool changed = true;
  while (changed) {
    changed = false;
    ++result.sweeps;
    for (int a = 0; a < size; ++a) {
      for (int b = 0; b < size; ++b) {
        if (a == b || !is_swap_blocking(m, a, b, table)) continue;
        SwapEvent e{a, b, utility(m, a, table), utility(m, b, table), 0, 0};
        m.swap_devices(a, b);
        e.first_after = utility(m, a, table);
        e.second_after = utility(m, b, table);
        result.swaps.push_back(e);
        changed = true;
      }
    }
  }
  return result;
}

bool verify_2es(const Matching& matching, const UtilityTable& table) {
  for (int a = 0; a < matching.size(); ++a) {
    for (int b = a + 1; b < matching.size(); ++b) {
      if (is_swap_blocking(matching, a, b, table)) return false;
    }
  }
  return true;
}

LatencyReport matching_latency(const Matching& matching,
                               const UtilityTable& table) {
  LatencyReport report;
  for (int n = 0; n < matching.size(); ++n) {
    const double u = utility(matching, n, table);
    if (u >= kUtilityMax) {
      report.dropped.push_back(n);
    } else {
      report.assigned.push_back(n);
      report.latency_s = std::max(report.latency_s.value_or(0.0), u);
    }
  }
  return report;
}

}  // namespace fedsched
