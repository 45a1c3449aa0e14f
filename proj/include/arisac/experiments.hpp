// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arisac/optimizer.hpp"
#include "arisac/scenario.hpp"

namespace arisac {

inline constexpr const char* kVersion = "0.1.0";

/// One (axis value, AS mode, seed) outcome. A failed seed keeps its row with
/// ok = false and the error text; numeric fields are then NaN.
struct RunRow {
  std::optional<double> axis_value;
  std::uint64_t seed = 0;
  AsMode as_mode = AsMode::Cuckoo;
  bool ok = false;
  std::string error;
  double wsr = 0.0;
  double radar_power = 0.0;
  double ris_power = 0.0;
  int iters = 0;
  bool converged = false;
  double wall_ms = 0.0;
  std::string subset;  // space-separated 0-based indices
  std::vector<double> trace;
};

struct Aggregate {
  std::optional<double> axis_value;
  AsMode as_mode = AsMode::Cuckoo;
  double mean_wsr = 0.0;
  double std_wsr = 0.0;  // sample standard deviation
  int ok = 0;
  int failed = 0;
};

struct RunReport {
  std::string axis = "none";
  std::vector<double> axis_values;
  std::vector<std::uint64_t> seeds;
  std::vector<AsMode> modes;
  std::string config_hash;
  nlohmann::json config;
  std::vector<RunRow> rows;  // sorted by (axis value, mode, seed)

  std::vector<Aggregate> aggregates() const;
  /// WSR of every row matching (axis value, mode), in seed order; NaN for failures.
  std::vector<double> wsr_column(std::optional<double> axis_value, AsMode mode) const;
};

AntennaSubset select_antennas(const ScenarioConfig& config, const ChannelSet& channels, std::uint64_t seed,
                              AsMode mode, ExecPolicy policy = ExecPolicy::Serial);

struct SingleRun {
  RunRow row;
  std::optional<Solution> solution;
};

/// channels -> antenna selection -> alternating optimization for one seed.
SingleRun run_single(const ScenarioConfig& config, std::uint64_t seed, AsMode mode,
                     std::optional<double> axis_value = std::nullopt);

/// All seeds of `config` for every mode. Seeds run concurrently under
/// ExecPolicy::Parallel; rows are identical to the serial order either way
/// (wall_ms aside).
RunReport run_scenario(const ScenarioConfig& config, std::span<const AsMode> modes,
                       ExecPolicy policy = ExecPolicy::Parallel);

/// Sweep axes: N, P (dBm), eta, rho, Ms. For rho the radar power is held at
/// radar_fraction_of_total * P, i.e. eta = min(1, fraction / rho).
ScenarioConfig apply_axis(const ScenarioConfig& config, const std::string& axis, double value);

RunReport sweep(const ScenarioConfig& config, const std::string& axis, std::span<const double> values,
                std::span<const AsMode> modes, ExecPolicy policy = ExecPolicy::Parallel);

/// 9 significant digits, round-trip stable for the reported quantities.
std::string format_number(double v);

void write_results_csv(const RunReport& report, const std::string& path);
void write_trace_csv(const RunReport& report, const std::string& path);
void write_summary_json(const RunReport& report, const std::string& path);

std::vector<double> angle_grid_deg(double start = -90.0, double stop = 90.0, double step = 0.5);

/// angle_deg,power_w with shortest round-trip formatting, so parsing the file
/// gives back the evaluated doubles exactly.
void emit_beampattern(const TransmitBeamformer& tx, const AntennaSubset& subset, std::span<const double> grid_deg,
                      double d_over_lambda, const std::string& path);

}  // namespace arisac
