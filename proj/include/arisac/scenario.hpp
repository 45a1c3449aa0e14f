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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arisac/channel.hpp"
#include "arisac/metrics.hpp"
#include "arisac/optimizer.hpp"
#include "arisac/selection.hpp"

namespace arisac {

enum class AsMode { Cuckoo, Random, Contiguous, Full };

std::string to_string(AsMode m);
AsMode parse_as_mode(const std::string& s);  // throws ConfigError

/// Everything a run needs. Powers are kept in dBm here and converted to watts
/// only when the numerical problem is built.
struct ScenarioConfig {
  SystemGeometry geometry;
  int num_selected = 6;
  ChannelParams channel;

  double total_power_dbm = 20.0;
  double split_ratio = 0.9;
  double radar_ratio = 0.75;
  // Radar power as a fraction of P, held fixed when sweeping the split
  // ratio: eta = min(1, fraction / rho).
  double radar_fraction_of_total = 0.6;

  double user_noise_dbm = -20.0;
  double ris_noise_dbm = -40.0;
  std::vector<double> weights;  // empty -> 1/K each

  AsMode as_mode = AsMode::Cuckoo;
  CuckooParams cuckoo;
  OptimizerConfig optimizer;

  std::uint64_t base_seed = 1;
  int num_seeds = 20;

  void validate() const;  // throws ConfigError

  PowerBudget budget() const;
  NoiseModel noise() const;
  std::vector<double> user_weights() const;
  std::vector<std::uint64_t> seeds() const;
};

nlohmann::json to_json(const ScenarioConfig& c);
/// Missing keys keep their defaults; unknown keys and wrong types are
/// rejected with ConfigError.
ScenarioConfig from_json(const nlohmann::json& j);

ScenarioConfig load_config(const std::string& path);  // IoError / ConfigError

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ScenarioConfig& c);

}  // namespace arisac
