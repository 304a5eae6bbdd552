#include "fedsched/system_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fedsched {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("system.") + field + ": " + what);
  }
}

}  // namespace

double free_space_factor(double carrier_hz) {
  const double r = kSpeedOfLight / (4.0 * kPi * carrier_hz);
  return r * r;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

double thermal_noise_w(double psd_dbm_per_hz, double bandwidth_hz) {
  return dbm_to_watts(psd_dbm_per_hz) * bandwidth_hz;
}

void SystemConfig::validate() const {
  require(num_subchannels >= 1, "num_subchannels", "must be >= 1");
  require(num_devices >= num_subchannels, "num_subchannels",
          "must not exceed num_devices");
  require(bandwidth_hz > 0, "bandwidth", "must be positive");
  require(transmit_power_w > 0, "transmit_power", "must be positive");
  require(noise_power_w > 0, "noise_psd", "noise power must be positive");
  require(path_loss_exponent > 0, "path_loss_exponent", "must be positive");
  require(carrier_frequency_hz > 0, "carrier_frequency", "must be positive");
  require(freq_factor > 0, "freq_factor", "must be positive");
  require(cycles_per_sample > 0, "cycles_per_sample", "must be positive");
  require(power_coeff > 0, "power_coeff", "must be positive");
  require(cpu_frequency_hz > 0, "cpu_frequency", "must be positive");
  require(model_size_bits > 0, "model_size", "must be positive");
  require(energy_budget_j > 0, "energy_budget", "must be positive");
  require(disc_radius_m > 0, "disc_radius", "must be positive");
  require(min_distance_m > 0 && min_distance_m <= disc_radius_m,
          "min_distance", "must lie in (0, disc_radius]");
  require(error_tolerance > 0, "error_tolerance", "must be positive");
}

void validate_device(const Device& device, const SystemConfig& config) {
  const std::string at = "device " + std::to_string(device.id) + ": ";
  if (device.samples < 1) throw std::invalid_argument(at + "samples < 1");
  if (!(device.cpu_freq_hz > 0))
    throw std::invalid_argument(at + "cpu frequency must be positive");
  if (!(device.distance_m > 0 && device.distance_m <= config.disc_radius_m))
    throw std::invalid_argument(at + "distance outside (0, R]");
  if (!(device.energy_budget_j > 0))
    throw std::invalid_argument(at + "energy budget must be positive");
}

double channel_gain(const SystemConfig& config, double distance_m,
                    double fading_power) {
  return config.transmit_power_w * fading_power * config.freq_factor *
         std::pow(distance_m, -config.path_loss_exponent) /
         config.noise_power_w;
}

ChannelMatrix draw_channels(Rng& rng, const SystemConfig& config,
                            std::span<const Device> devices, int round) {
  ChannelMatrix m;
  m.round = round;
  m.num_subchannels = config.num_subchannels;
  m.num_devices = static_cast<int>(devices.size());
  m.gains.resize(static_cast<std::size_t>(m.num_subchannels) * m.num_devices);
  for (int k = 0; k < m.num_subchannels; ++k) {
    for (int n = 0; n < m.num_devices; ++n) {
      double x = draw_exponential(rng);
      // An exact zero draw has probability ~2^-53; keep gains strictly positive.
      if (x <= 0.0) x = std::numeric_limits<double>::min();
      m.gain(k, n) = channel_gain(config, devices[n].distance_m, x);
    }
  }
  return m;
}

std::vector<Device> place_devices(Rng& rng, const SystemConfig& config,
                                  std::span<const int> sample_counts) {
  std::vector<Device> devices;
  devices.reserve(sample_counts.size());
  const double r_min2 = config.min_distance_m * config.min_distance_m;
  const double r_max2 = config.disc_radius_m * config.disc_radius_m;
  for (std::size_t n = 0; n < sample_counts.size(); ++n) {
    Device d;
    d.id = static_cast<int>(n);
    d.samples = sample_counts[n];
    d.cpu_freq_hz = config.cpu_frequency_hz;
    d.energy_budget_j = config.energy_budget_j;
    // Uniform over the annulus [r_min, R]: the squared radius is uniform.
    d.distance_m = std::sqrt(draw_uniform(rng, r_min2, r_max2));
    devices.push_back(d);
  }
  return devices;
}

double comp_time(const SystemConfig& config, const Device& device,
                 double tau) {
  if (!(tau > 0.0)) {
    throw std::domain_error("comp_time: degenerate allocation tau = 0");
  }
  return config.cycles_per_sample * device.samples / (tau * device.cpu_freq_hz);
}

double comp_energy(const SystemConfig& config, const Device& device,
                   double tau) {
  const double f = tau * device.cpu_freq_hz;
  return config.power_coeff * config.cycles_per_sample * device.samples * f * f;
}

double comm_rate(double gain, double p, const SystemConfig& config) {
  return config.bandwidth_hz * std::log2(1.0 + p * gain);
}

double comm_time(const SystemConfig& config, double rate) {
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return config.model_size_bits / rate;
}

double comm_energy(double p, const SystemConfig& config, double comm_time_s) {
  // Zero power spends nothing, whatever the (infinite) airtime.
  if (p == 0.0) return 0.0;
  return p * config.transmit_power_w * comm_time_s;
}

double total_time(const SystemConfig& config, const Device& device,
                  double gain, double tau, double p) {
  return comp_time(config, device, tau) +
         comm_time(config, comm_rate(gain, p, config));
}

double total_energy(const SystemConfig& config, const Device& device,
                    double gain, double tau, double p) {
  return comp_energy(config, device, tau) +
         comm_energy(p, config, comm_time(config, comm_rate(gain, p, config)));
}

bool is_infeasible_pair(const Device& device, double gain,
                        const SystemConfig& config) {
  return std::numbers::ln2 * config.transmit_power_w * config.model_size_bits >=
         device.energy_budget_j * config.bandwidth_hz * gain;
}

LinkModel::LinkModel(const SystemConfig& config, const Device& device,
                     double gain)
    : cycles_(config.cycles_per_sample * device.samples),
      cpu_freq_(device.cpu_freq_hz),
      power_coeff_(config.power_coeff),
      bandwidth_(config.bandwidth_hz),
      transmit_power_(config.transmit_power_w),
      model_bits_(config.model_size_bits),
      gain_(gain),
      energy_budget_(device.energy_budget_j) {}

double LinkModel::rate(double p) const {
  return bandwidth_ * std::log1p(p * gain_) / std::numbers::ln2;
}

double LinkModel::comm_time(double p) const {
  const double r = rate(p);
  if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
  return model_bits_ / r;
}

double LinkModel::comm_energy(double p) const {
  if (p == 0.0) return 0.0;
  // log1p keeps the ratio accurate when p * |h|^2 is tiny.
  return p * transmit_power_ * model_bits_ * std::numbers::ln2 /
         (bandwidth_ * std::log1p(p * gain_));
}

double LinkModel::min_comm_energy() const {
  return std::numbers::ln2 * transmit_power_ * model_bits_ / (bandwidth_ * gain_);
}

}  // namespace fedsched
