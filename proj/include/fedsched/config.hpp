#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fedsched/fl_engine.hpp"
#include "fedsched/follower.hpp"
#include "fedsched/system_model.hpp"

namespace fedsched {

enum class SelectionScheme { kAoU, kRandom, kCluster, kFixed };

std::string_view to_string(SelectionScheme s);
std::string_view to_string(AllocationMode m);
std::string_view to_string(AssignmentMode m);
std::string_view to_string(TaskKind k);

SelectionScheme parse_scheme(std::string_view name);
AllocationMode parse_allocation_mode(std::string_view name);
AssignmentMode parse_assignment_mode(std::string_view name);

struct TaskSettings {
  TaskKind kind = TaskKind::kRidge;
  int total_samples = 500;
  int dim = 5;
  double regularization = 0.01;
  // Empty means 1/L, computed from the partitioned data.
  std::optional<double> learning_rate;
  double label_noise = 0.5;
};

struct SchemeSettings {
  SelectionScheme selection = SelectionScheme::kAoU;
  AllocationMode allocation = AllocationMode::kMonotonic;
  AssignmentMode assignment = AssignmentMode::kMatching;
  InitialMatching initial = InitialMatching::kIdentity;
};

struct RunSettings {
  int rounds = 200;
  std::uint64_t seed = 1;
  bool track_bound = true;
  std::string out_dir = "out";
};

struct SimulationConfig {
  SystemConfig system;
  double noise_psd_dbm_per_hz = -174.0;
  // Set when eta is given explicitly instead of derived from the carrier.
  std::optional<double> freq_factor_override;
  TaskSettings task;
  SchemeSettings scheme;
  RunSettings run;

  // Recomputes the noise power and eta from the primary fields.
  void resolve();

  // Throws std::invalid_argument with the offending key in the message.
  void validate() const;
};

// Parses a JSON document with the sections system, task, scheme, run and
// output. Every key is optional and defaults to the reference parameter set;
// unknown keys are rejected. Physical quantities accept either a bare number
// in SI units or a string with a unit, e.g. "10 dBm", "1 MHz", "0.02 J".
SimulationConfig parse_config_text(std::string_view text);
SimulationConfig parse_config(const std::filesystem::path& path);

// Overrides one key given as "section.key", with the same value syntax as
// the file. Used by the command-line sweep.
void apply_override(SimulationConfig& config, std::string_view key,
                    std::string_view value);

// The configuration in SI units, in the same layout parse_config_text()
// accepts.
nlohmann::json to_json(const SimulationConfig& config);

// to_json() under "config", plus the derived noise power and eta under
// "derived".
nlohmann::json echo_json(const SimulationConfig& config);

}  // namespace fedsched
