// Command-line driver: runs one simulation, or a grid of them with --sweep.
//
//   fedsched --config cfg.json --scheme aou --rounds 200 --out out/
//   fedsched --sweep system.energy_budget=0.005,0.01,0.02,0.04 --scheme random

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedsched/config.hpp"
#include "fedsched/output.hpp"
#include "fedsched/simulation.hpp"

namespace {

struct Sweep {
  std::string key;
  std::vector<std::string> values;
};

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw std::invalid_argument("--sweep expects <section.key>=<v1>,<v2>,..., got '" + spec + "'");
  }
  Sweep s{spec.substr(0, eq), {}};
  std::string rest = spec.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    const auto end = comma == std::string::npos ? rest.size() : comma;
    if (end > start) s.values.push_back(rest.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (s.values.empty()) throw std::invalid_argument("--sweep '" + spec + "' has no values");
  return s;
}

double mean_participants(const fedsched::RunSummary& s) {
  if (s.rounds.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : s.rounds) sum += r.participants;
  return sum / static_cast<double>(s.rounds.size());
}

std::string short_key(const std::string& key) {
  const auto dot = key.rfind('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning scheduling simulator"};

  std::string config_path;
  std::uint64_t seed = 0;
  std::string scheme, ra, sa, out_dir;
  int rounds = -1;
  std::vector<std::string> sweep_specs;

  app.add_option("--config", config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master random seed");
  app.add_option("--scheme", scheme, "Device selection scheme")
      ->check(CLI::IsMember({"aou", "random", "cluster", "fixed"}));
  app.add_option("--ra", ra, "Resource allocation")->check(CLI::IsMember({"mo", "fix"}));
  app.add_option("--sa", sa, "Sub-channel assignment")->check(CLI::IsMember({"match", "random"}));
  app.add_option("--rounds", rounds, "Communication rounds")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--sweep", sweep_specs, "<section.key>=<v1>,<v2>,... (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    fedsched::SimulationConfig base =
        config_path.empty() ? fedsched::parse_config_text("")
                            : fedsched::parse_config(config_path);
    if (*seed_opt) base.run.seed = seed;
    if (!scheme.empty()) base.scheme.selection = fedsched::parse_scheme(scheme);
    if (!ra.empty()) base.scheme.allocation = fedsched::parse_allocation_mode(ra);
    if (!sa.empty()) base.scheme.assignment = fedsched::parse_assignment_mode(sa);
    if (rounds >= 0) base.run.rounds = rounds;
    if (!out_dir.empty()) base.run.out_dir = out_dir;
    base.validate();

    std::vector<Sweep> sweeps;
    for (const auto& spec : sweep_specs) sweeps.push_back(parse_sweep(spec));

    if (sweeps.empty()) {
      const auto summary = fedsched::run_simulation(base);
      fedsched::emit_outputs(summary, base.run.out_dir);
      std::cout << "scheme=" << fedsched::to_string(base.scheme.selection)
                << " rounds=" << summary.rounds.size()
                << " final_loss=" << fedsched::format_double(summary.final_loss)
                << " cum_time_s=" << fedsched::format_double(summary.cumulative_time_s)
                << " mean_participants=" << mean_participants(summary)
                << " out=" << base.run.out_dir << '\n';
      return 0;
    }

    const std::filesystem::path root = base.run.out_dir;
    std::filesystem::create_directories(root);
    std::ofstream table(root / "sweep.csv");
    for (const auto& s : sweeps) table << s.key << ',';
    table << "seed,final_loss,cum_time_s,mean_participants\n";

    // Odometer over the cartesian product of the grids.
    std::vector<std::size_t> index(sweeps.size(), 0);
    for (;;) {
      fedsched::SimulationConfig cfg = base;
      std::string name;
      for (std::size_t i = 0; i < sweeps.size(); ++i) {
        const std::string& v = sweeps[i].values[index[i]];
        fedsched::apply_override(cfg, sweeps[i].key, v);
        name += (name.empty() ? "" : "_") + short_key(sweeps[i].key) + "=" + v;
      }
      cfg.run.out_dir = (root / name).string();
      const auto summary = fedsched::run_simulation(cfg);
      fedsched::emit_outputs(summary, cfg.run.out_dir);
      for (std::size_t i = 0; i < sweeps.size(); ++i) {
        table << sweeps[i].values[index[i]] << ',';
      }
      table << cfg.run.seed << ',' << fedsched::format_double(summary.final_loss)
            << ',' << fedsched::format_double(summary.cumulative_time_s) << ','
            << fedsched::format_double(mean_participants(summary)) << '\n';
      std::cout << name << " final_loss=" << fedsched::format_double(summary.final_loss)
                << " mean_participants=" << mean_participants(summary) << '\n';

      std::size_t i = 0;
      while (i < sweeps.size() && ++index[i] == sweeps[i].values.size()) {
        index[i++] = 0;
      }
      if (i == sweeps.size()) break;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
