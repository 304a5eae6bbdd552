#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedsched/rng.hpp"

namespace fedsched {

// Lower bound on the computation share tau and the power share p. Both the
// computation time and the transmission time diverge as either approaches 0.
inline constexpr double kDomainFloor = 1e-6;

inline constexpr double kSpeedOfLight = 299792458.0;

// Free-space reference factor (c / (4 pi f))^2.
double free_space_factor(double carrier_hz);

double dbm_to_watts(double dbm);

// Noise power over a band, given a power spectral density in dBm/Hz.
double thermal_noise_w(double psd_dbm_per_hz, double bandwidth_hz);

struct SystemConfig {
  int num_devices = 20;
  int num_subchannels = 4;
  double bandwidth_hz = 1e6;
  double transmit_power_w = 0.01;
  double noise_power_w = thermal_noise_w(-174.0, 1e6);
  double path_loss_exponent = 3.76;
  double carrier_frequency_hz = 1e9;
  double freq_factor = free_space_factor(1e9);
  double cycles_per_sample = 1e7;
  double power_coeff = 1e-28;
  double cpu_frequency_hz = 1e9;
  double model_size_bits = 1e6;
  double energy_budget_j = 0.02;
  double disc_radius_m = 500.0;
  double min_distance_m = 1.0;
  double error_tolerance = 0.01;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Device {
  int id = 0;
  int samples = 1;
  double cpu_freq_hz = 1e9;
  double distance_m = 1.0;
  double energy_budget_j = 0.02;
};

void validate_device(const Device& device, const SystemConfig& config);

// Normalized channel gains |h_{k,n}|^2, one row per sub-channel.
struct ChannelMatrix {
  int round = 0;
  int num_subchannels = 0;
  int num_devices = 0;
  std::vector<double> gains;

  double gain(int subchannel, int device) const {
    return gains[static_cast<std::size_t>(subchannel) * num_devices + device];
  }
  double& gain(int subchannel, int device) {
    return gains[static_cast<std::size_t>(subchannel) * num_devices + device];
  }
};

// P_t * |g|^2 * eta * d^-a / sigma^2 for a given small-scale fading power |g|^2.
double channel_gain(const SystemConfig& config, double distance_m,
                    double fading_power);

// Independent Rayleigh fading per (sub-channel, device) pair.
ChannelMatrix draw_channels(Rng& rng, const SystemConfig& config,
                            std::span<const Device> devices, int round);

// Uniform placement over the disc, no closer than config.min_distance_m.
std::vector<Device> place_devices(Rng& rng, const SystemConfig& config,
                                  std::span<const int> sample_counts);

// Per-device time and energy. tau and p are the computation and power shares.
double comp_time(const SystemConfig& config, const Device& device, double tau);
double comp_energy(const SystemConfig& config, const Device& device,
                   double tau);
double comm_rate(double gain, double p, const SystemConfig& config);
double comm_time(const SystemConfig& config, double rate);
double comm_energy(double p, const SystemConfig& config, double comm_time_s);
double total_time(const SystemConfig& config, const Device& device,
                  double gain, double tau, double p);
double total_energy(const SystemConfig& config, const Device& device,
                    double gain, double tau, double p);

// True when no (tau, p) can meet the energy budget on this link:
// ln(2) P_t D >= E_max B |h|^2.
bool is_infeasible_pair(const Device& device, double gain,
                        const SystemConfig& config);

// Time and energy of one device transmitting on one sub-channel, with the
// constants folded in. This is the hot path of the allocator and its oracles.
class LinkModel {
 public:
  LinkModel(const SystemConfig& config, const Device& device, double gain);

  double comp_time(double tau) const { return cycles_ / (tau * cpu_freq_); }
  double comp_energy(double tau) const {
    const double f = tau * cpu_freq_;
    return power_coeff_ * cycles_ * f * f;
  }
  double rate(double p) const;
  double comm_time(double p) const;
  double comm_energy(double p) const;
  double time(double tau, double p) const {
    return comp_time(tau) + comm_time(p);
  }
  double energy(double tau, double p) const {
    return comp_energy(tau) + comm_energy(p);
  }

  // Limit of comm_energy(p) as p -> 0+, i.e. ln(2) P_t D / (B |h|^2).
  double min_comm_energy() const;

  double energy_budget() const { return energy_budget_; }
  double gain() const { return gain_; }

 private:
  double cycles_;  // mu * beta
  double cpu_freq_;
  double power_coeff_;
  double bandwidth_;
  double transmit_power_;
  double model_bits_;
  double gain_;
  double energy_budget_;
};

}  // namespace fedsched
