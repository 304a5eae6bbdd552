#include "fedsched/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace fedsched {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string rounds_csv_header(int num_devices) {
  std::string h = "t,scheme,latency_s,n_participants,global_loss,bound,cum_time_s";
  for (int n = 0; n < num_devices; ++n) {
    const std::string d = "d" + std::to_string(n) + "_";
    for (const char* col :
         {"selected", "channel", "tau", "p", "time_s", "energy_j", "aou"}) {
      h += "," + d + col;
    }
  }
  return h;
}

void write_rounds_csv(const RunSummary& summary, std::ostream& out) {
  out << rounds_csv_header(summary.config.system.num_devices) << '\n';
  for (const RoundRecord& r : summary.rounds) {
    out << r.round << ',' << to_string(r.scheme) << ','
        << format_double(r.latency_s) << ',' << r.participants << ','
        << format_double(r.global_loss) << ','
        << (std::isnan(r.bound) ? std::string() : format_double(r.bound))
        << ',' << format_double(r.cumulative_time_s);
    for (const DeviceRound& d : r.devices) {
      out << ',' << (d.selected ? 1 : 0) << ',' << d.channel << ','
          << format_double(d.tau) << ',' << format_double(d.p) << ','
          << format_double(d.time_s) << ',' << format_double(d.energy_j)
          << ',' << d.aou;
    }
    out << '\n';
  }
}

json summary_json(const RunSummary& s) {
  json series = {{"latency_s", json::array()},
                 {"n_participants", json::array()},
                 {"global_loss", json::array()},
                 {"bound", json::array()},
                 {"cum_time_s", json::array()},
                 {"replaced", json::array()},
                 {"carried_over", json::array()}};
  for (const RoundRecord& r : s.rounds) {
    series["latency_s"].push_back(r.latency_s);
    series["n_participants"].push_back(r.participants);
    series["global_loss"].push_back(r.global_loss);
    series["bound"].push_back(std::isnan(r.bound) ? json(nullptr) : json(r.bound));
    series["cum_time_s"].push_back(r.cumulative_time_s);
    series["replaced"].push_back(r.replaced);
    series["carried_over"].push_back(r.carried_over);
  }
  return {
      {"seed", s.config.run.seed},
      {"scheme", to_string(s.config.scheme.selection)},
      {"rounds", s.rounds.size()},
      {"cumulative_time_s", s.cumulative_time_s},
      {"initial_loss", s.initial_loss},
      {"final_loss", s.final_loss},
      {"learning_rate", s.learning_rate},
      {"constants",
       {{"L", s.constants.lipschitz},
        {"mu", s.constants.strong_convexity},
        {"rho", s.constants.rho},
        {"optimal_loss", s.constants.optimal_loss}}},
      {"series", series},
      {"config", to_json(s.config)},
  };
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void emit_outputs(const RunSummary& summary,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create '" + out_dir.string() +
                             "': " + ec.message());
  }

  const auto csv_path = out_dir / "rounds.csv";
  auto csv = open_for_write(csv_path);
  write_rounds_csv(summary, csv);
  finish(csv, csv_path);

  const auto summary_path = out_dir / "summary.json";
  auto js = open_for_write(summary_path);
  js << summary_json(summary).dump(2) << '\n';
  finish(js, summary_path);

  const auto echo_path = out_dir / "config_echo.json";
  auto echo = open_for_write(echo_path);
  echo << echo_json(summary.config).dump(2) << '\n';
  finish(echo, echo_path);
}

}  // namespace fedsched
