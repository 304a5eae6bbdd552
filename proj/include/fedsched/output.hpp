#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "fedsched/simulation.hpp"

namespace fedsched {

// Shortest decimal text that parses back to the same double; "nan", "inf"
// and "-inf" for non-finite values.
std::string format_double(double value);

// t,scheme,latency_s,n_participants,global_loss,bound,cum_time_s followed by
// one block per device n:
//   d<n>_selected,d<n>_channel,d<n>_tau,d<n>_p,d<n>_time_s,d<n>_energy_j,d<n>_aou
// The bound column is empty when bound tracking is off. A device without an
// upload has channel -1 and zero tau, p, time and energy.
std::string rounds_csv_header(int num_devices);
void write_rounds_csv(const RunSummary& summary, std::ostream& out);

nlohmann::json summary_json(const RunSummary& summary);

// Writes rounds.csv, summary.json and config_echo.json into out_dir,
// creating it if needed. Throws std::runtime_error naming the failing path.
void emit_outputs(const RunSummary& summary,
                  const std::filesystem::path& out_dir);

}  // namespace fedsched
