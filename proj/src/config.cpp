#include "fedsched/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fedsched {

using nlohmann::json;

std::string_view to_string(SelectionScheme s) {
  switch (s) {
    case SelectionScheme::kAoU: return "aou";
    case SelectionScheme::kRandom: return "random";
    case SelectionScheme::kCluster: return "cluster";
    case SelectionScheme::kFixed: return "fixed";
  }
  return "?";
}

std::string_view to_string(AllocationMode m) {
  return m == AllocationMode::kMonotonic ? "mo" : "fix";
}

std::string_view to_string(AssignmentMode m) {
  return m == AssignmentMode::kMatching ? "match" : "random";
}

std::string_view to_string(TaskKind k) {
  return k == TaskKind::kRidge ? "ridge" : "logistic";
}

namespace {

[[noreturn]] void fail(std::string_view key, std::string_view what) {
  throw std::invalid_argument(std::string(key) + ": " + std::string(what));
}

}  // namespace

SelectionScheme parse_scheme(std::string_view name) {
  if (name == "aou") return SelectionScheme::kAoU;
  if (name == "random") return SelectionScheme::kRandom;
  if (name == "cluster") return SelectionScheme::kCluster;
  if (name == "fixed") return SelectionScheme::kFixed;
  fail("scheme.selection", "expected aou|random|cluster|fixed, got '" +
                               std::string(name) + "'");
}

AllocationMode parse_allocation_mode(std::string_view name) {
  if (name == "mo") return AllocationMode::kMonotonic;
  if (name == "fix") return AllocationMode::kFixed;
  fail("scheme.ra", "expected mo|fix, got '" + std::string(name) + "'");
}

AssignmentMode parse_assignment_mode(std::string_view name) {
  if (name == "match") return AssignmentMode::kMatching;
  if (name == "random") return AssignmentMode::kRandom;
  fail("scheme.sa", "expected match|random, got '" + std::string(name) + "'");
}

namespace {

enum class Dim { kNone, kPower, kFrequency, kPsd, kEnergy, kDistance, kBits, kTime };

struct Unit {
  std::string_view name;
  Dim dim;
  std::function<double(double)> to_si;
};

const std::vector<Unit>& units() {
  static const std::vector<Unit> table = {
      {"W", Dim::kPower, [](double v) { return v; }},
      {"mW", Dim::kPower, [](double v) { return v * 1e-3; }},
      {"dBm", Dim::kPower, [](double v) { return dbm_to_watts(v); }},
      {"dBW", Dim::kPower, [](double v) { return dbm_to_watts(v + 30.0); }},
      {"Hz", Dim::kFrequency, [](double v) { return v; }},
      {"kHz", Dim::kFrequency, [](double v) { return v * 1e3; }},
      {"MHz", Dim::kFrequency, [](double v) { return v * 1e6; }},
      {"GHz", Dim::kFrequency, [](double v) { return v * 1e9; }},
      {"dBm/Hz", Dim::kPsd, [](double v) { return v; }},
      {"J", Dim::kEnergy, [](double v) { return v; }},
      {"mJ", Dim::kEnergy, [](double v) { return v * 1e-3; }},
      {"m", Dim::kDistance, [](double v) { return v; }},
      {"km", Dim::kDistance, [](double v) { return v * 1e3; }},
      {"bit", Dim::kBits, [](double v) { return v; }},
      {"kbit", Dim::kBits, [](double v) { return v * 1e3; }},
      {"Mbit", Dim::kBits, [](double v) { return v * 1e6; }},
      {"s", Dim::kTime, [](double v) { return v; }},
      {"ms", Dim::kTime, [](double v) { return v * 1e-3; }},
  };
  return table;
}

double parse_number(std::string_view key, std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(key, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

double quantity(std::string_view key, const json& value, Dim dim) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) fail(key, "expected a number or a quantity string");
  const std::string text = value.get<std::string>();
  const auto space = text.find_last_of(' ');
  if (space == std::string::npos) return parse_number(key, text);
  const std::string_view unit = std::string_view(text).substr(space + 1);
  for (const Unit& u : units()) {
    if (u.name == unit) {
      if (u.dim != dim) fail(key, "unit '" + std::string(unit) + "' has the wrong dimension");
      return u.to_si(parse_number(key, std::string_view(text).substr(0, space)));
    }
  }
  fail(key, "unknown unit '" + std::string(unit) + "'");
}

int integer(std::string_view key, const json& value) {
  if (!value.is_number_integer()) fail(key, "expected an integer");
  return value.get<int>();
}

std::string text(std::string_view key, const json& value) {
  if (!value.is_string()) fail(key, "expected a string");
  return value.get<std::string>();
}

using Setter = std::function<void(SimulationConfig&, std::string_view, const json&)>;

Setter real(double SystemConfig::*field, Dim dim) {
  return [field, dim](SimulationConfig& c, std::string_view key, const json& v) {
    c.system.*field = quantity(key, v, dim);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"system.num_devices",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.system.num_devices = integer(k, v);
       }},
      {"system.num_subchannels",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.system.num_subchannels = integer(k, v);
       }},
      {"system.bandwidth", real(&SystemConfig::bandwidth_hz, Dim::kFrequency)},
      {"system.transmit_power", real(&SystemConfig::transmit_power_w, Dim::kPower)},
      {"system.noise_psd",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.noise_psd_dbm_per_hz = quantity(k, v, Dim::kPsd);
       }},
      {"system.path_loss_exponent", real(&SystemConfig::path_loss_exponent, Dim::kNone)},
      {"system.carrier_frequency", real(&SystemConfig::carrier_frequency_hz, Dim::kFrequency)},
      {"system.freq_factor",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         if (v.is_null()) {
           c.freq_factor_override.reset();
         } else {
           c.freq_factor_override = quantity(k, v, Dim::kNone);
         }
       }},
      {"system.cycles_per_sample", real(&SystemConfig::cycles_per_sample, Dim::kNone)},
      {"system.power_coeff", real(&SystemConfig::power_coeff, Dim::kNone)},
      {"system.cpu_frequency", real(&SystemConfig::cpu_frequency_hz, Dim::kFrequency)},
      {"system.model_size", real(&SystemConfig::model_size_bits, Dim::kBits)},
      {"system.energy_budget", real(&SystemConfig::energy_budget_j, Dim::kEnergy)},
      {"system.disc_radius", real(&SystemConfig::disc_radius_m, Dim::kDistance)},
      {"system.min_distance", real(&SystemConfig::min_distance_m, Dim::kDistance)},
      {"system.error_tolerance", real(&SystemConfig::error_tolerance, Dim::kTime)},
      {"task.kind",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         const std::string s = text(k, v);
         if (s == "ridge") {
           c.task.kind = TaskKind::kRidge;
         } else if (s == "logistic") {
           c.task.kind = TaskKind::kLogistic;
         } else {
           fail(k, "expected ridge|logistic");
         }
       }},
      {"task.total_samples",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.task.total_samples = integer(k, v);
       }},
      {"task.dim",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.task.dim = integer(k, v);
       }},
      {"task.regularization",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.task.regularization = quantity(k, v, Dim::kNone);
       }},
      {"task.learning_rate",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         if (v.is_string() && v.get<std::string>() == "1/L") {
           c.task.learning_rate.reset();
         } else {
           c.task.learning_rate = quantity(k, v, Dim::kNone);
         }
       }},
      {"task.label_noise",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.task.label_noise = quantity(k, v, Dim::kNone);
       }},
      {"scheme.selection",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.scheme.selection = parse_scheme(text(k, v));
       }},
      {"scheme.ra",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.scheme.allocation = parse_allocation_mode(text(k, v));
       }},
      {"scheme.sa",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.scheme.assignment = parse_assignment_mode(text(k, v));
       }},
      {"scheme.initial_matching",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         const std::string s = text(k, v);
         if (s == "identity") {
           c.scheme.initial = InitialMatching::kIdentity;
         } else if (s == "random") {
           c.scheme.initial = InitialMatching::kRandom;
         } else {
           fail(k, "expected identity|random");
         }
       }},
      {"run.rounds",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.run.rounds = integer(k, v);
       }},
      {"run.seed",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
           fail(k, "expected a non-negative integer");
         }
         c.run.seed = v.get<std::uint64_t>();
       }},
      {"run.track_bound",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         if (!v.is_boolean()) fail(k, "expected true|false");
         c.run.track_bound = v.get<bool>();
       }},
      {"output.dir",
       [](SimulationConfig& c, std::string_view k, const json& v) {
         c.run.out_dir = text(k, v);
       }},
  };
  return table;
}

void apply(SimulationConfig& config, std::string_view key, const json& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) fail(key, "unknown key");
  it->second(config, key, value);
}

}  // namespace

void SimulationConfig::resolve() {
  system.noise_power_w = thermal_noise_w(noise_psd_dbm_per_hz, system.bandwidth_hz);
  system.freq_factor = freq_factor_override.value_or(
      free_space_factor(system.carrier_frequency_hz));
}

void SimulationConfig::validate() const {
  system.validate();
  if (task.total_samples < system.num_devices) {
    fail("task.total_samples", "must be at least system.num_devices");
  }
  if (task.dim < 1) fail("task.dim", "must be >= 1");
  if (!(task.regularization >= 1e-3)) fail("task.regularization", "must be >= 1e-3");
  if (task.learning_rate && !(*task.learning_rate > 0.0)) {
    fail("task.learning_rate", "must be positive");
  }
  if (!(task.label_noise >= 0.0)) fail("task.label_noise", "must be >= 0");
  if (run.rounds < 0) fail("run.rounds", "must be >= 0");
  if (scheme.selection == SelectionScheme::kCluster &&
      system.num_devices % system.num_subchannels != 0) {
    fail("scheme.selection",
         "cluster scheme needs num_devices divisible by num_subchannels");
  }
}

SimulationConfig parse_config_text(std::string_view text) {
  SimulationConfig config;
  json doc;
  bool blank = true;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
  }
  if (!blank) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) fail("config", "top level must be an object");
    for (const auto& [section, body] : doc.items()) {
      if (section != "system" && section != "task" && section != "scheme" &&
          section != "run" && section != "output") {
        fail(section, "unknown section");
      }
      if (!body.is_object()) fail(section, "expected a section object");
      for (const auto& [key, value] : body.items()) {
        apply(config, section + "." + key, value);
      }
    }
  }
  config.resolve();
  config.validate();
  return config;
}

SimulationConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot open '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_override(SimulationConfig& config, std::string_view key,
                    std::string_view value) {
  json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) parsed = std::string(value);
  apply(config, key, parsed);
  config.resolve();
  config.validate();
}

json to_json(const SimulationConfig& c) {
  const SystemConfig& s = c.system;
  json j;
  j["system"] = {
      {"num_devices", s.num_devices},
      {"num_subchannels", s.num_subchannels},
      {"bandwidth", s.bandwidth_hz},
      {"transmit_power", s.transmit_power_w},
      {"noise_psd", c.noise_psd_dbm_per_hz},
      {"path_loss_exponent", s.path_loss_exponent},
      {"carrier_frequency", s.carrier_frequency_hz},
      {"freq_factor", c.freq_factor_override ? json(*c.freq_factor_override) : json(nullptr)},
      {"cycles_per_sample", s.cycles_per_sample},
      {"power_coeff", s.power_coeff},
      {"cpu_frequency", s.cpu_frequency_hz},
      {"model_size", s.model_size_bits},
      {"energy_budget", s.energy_budget_j},
      {"disc_radius", s.disc_radius_m},
      {"min_distance", s.min_distance_m},
      {"error_tolerance", s.error_tolerance},
  };
  j["task"] = {
      {"kind", to_string(c.task.kind)},
      {"total_samples", c.task.total_samples},
      {"dim", c.task.dim},
      {"regularization", c.task.regularization},
      {"learning_rate", c.task.learning_rate ? json(*c.task.learning_rate) : json("1/L")},
      {"label_noise", c.task.label_noise},
  };
  j["scheme"] = {
      {"selection", to_string(c.scheme.selection)},
      {"ra", to_string(c.scheme.allocation)},
      {"sa", to_string(c.scheme.assignment)},
      {"initial_matching",
       c.scheme.initial == InitialMatching::kIdentity ? "identity" : "random"},
  };
  j["run"] = {{"rounds", c.run.rounds},
              {"seed", c.run.seed},
              {"track_bound", c.run.track_bound}};
  j["output"] = {{"dir", c.run.out_dir}};
  return j;
}

json echo_json(const SimulationConfig& c) {
  return {{"config", to_json(c)},
          {"derived",
           {{"noise_power_w", c.system.noise_power_w},
            {"freq_factor", c.system.freq_factor}}}};
}

}  // namespace fedsched
