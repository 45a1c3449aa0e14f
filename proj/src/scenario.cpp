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

#include "arisac/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace arisac {

using nlohmann::json;

std::string to_string(AsMode m) {
  switch (m) {
    case AsMode::Cuckoo: return "cuckoo";
    case AsMode::Random: return "random";
    case AsMode::Contiguous: return "contiguous";
    case AsMode::Full: return "full";
  }
  return "unknown";
}

AsMode parse_as_mode(const std::string& s) {
  if (s == "cuckoo") return AsMode::Cuckoo;
  if (s == "random") return AsMode::Random;
  if (s == "contiguous") return AsMode::Contiguous;
  if (s == "full") return AsMode::Full;
  throw ConfigError("unknown AS mode '" + s + "' (expected cuckoo, random, contiguous or full)");
}

void ScenarioConfig::validate() const {
  geometry.validate();
  channel.validate();
  if (num_selected < 1 || num_selected > geometry.num_antennas) {
    throw ConfigError("num_selected must lie in [1, num_antennas]");
  }
  if (as_mode == AsMode::Full && num_selected != geometry.num_antennas) {
    throw ConfigError("AS mode 'full' requires num_selected == num_antennas");
  }
  budget().validate();
  if (!(radar_fraction_of_total > 0.0 && radar_fraction_of_total <= 1.0)) {
    throw ConfigError("radar_fraction_of_total must lie in (0, 1]");
  }
  noise().validate(geometry.num_users);
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) != geometry.num_users) throw ConfigError("one weight per user");
    for (double w : weights) {
      if (!(w >= 0.0)) throw ConfigError("user weights must be >= 0");
    }
  }
  cuckoo.validate();
  optimizer.validate();
  if (num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
}

PowerBudget ScenarioConfig::budget() const {
  PowerBudget b;
  b.total_w = dbm_to_watts(total_power_dbm);
  b.split_ratio = split_ratio;
  b.radar_ratio = radar_ratio;
  return b;
}

NoiseModel ScenarioConfig::noise() const {
  return NoiseModel::shared(geometry.num_users, dbm_to_watts(user_noise_dbm), dbm_to_watts(ris_noise_dbm));
}

std::vector<double> ScenarioConfig::user_weights() const {
  return weights.empty() ? uniform_weights(geometry.num_users) : weights;
}

std::vector<std::uint64_t> ScenarioConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < num_seeds; ++i) out.push_back(base_seed + static_cast<std::uint64_t>(i));
  return out;
}

namespace {

json point(const Point2& p) { return json::array({p.x, p.y}); }

json to_json_impl(const ScenarioConfig& c) {
  const auto& g = c.geometry;
  const auto& o = c.optimizer;
  return json{
      {"geometry",
       {{"bs_position", point(g.bs_position)},
        {"ris_position", point(g.ris_position)},
        {"user_center", point(g.user_center)},
        {"user_radius", g.user_radius},
        {"num_users", g.num_users},
        {"num_antennas", g.num_antennas},
        {"num_selected", c.num_selected},
        {"num_ris_elements", g.num_ris_elements},
        {"target_angle_deg", rad_to_deg(g.target_angle)}}},
      {"channel",
       {{"pathloss_ref_db", c.channel.pathloss_ref_db},
        {"exponent_direct", c.channel.exponent_direct},
        {"exponent_ris", c.channel.exponent_ris},
        {"rician_factor", c.channel.rician_factor},
        {"d_over_lambda", c.channel.d_over_lambda}}},
      {"power",
       {{"total_dbm", c.total_power_dbm},
        {"split_ratio", c.split_ratio},
        {"radar_ratio", c.radar_ratio},
        {"radar_fraction_of_total", c.radar_fraction_of_total}}},
      {"noise", {{"user_dbm", c.user_noise_dbm}, {"ris_dbm", c.ris_noise_dbm}}},
      {"weights", c.weights},
      {"selection",
       {{"as_mode", to_string(c.as_mode)},
        {"population", c.cuckoo.population},
        {"max_iters", c.cuckoo.max_iters},
        {"levy_exponent", c.cuckoo.levy_exponent},
        {"step_scale", c.cuckoo.step_scale},
        {"discard_prob", c.cuckoo.discard_prob},
        {"stagnation_window", c.cuckoo.stagnation_window}}},
      {"optimizer",
       {{"max_outer_iters", o.max_outer_iters},
        {"wsr_tol", o.wsr_tol},
        {"randomizations", o.randomizations},
        {"sdp_tol", o.sdp.tol},
        {"sdp_kkt_tol", o.sdp.kkt_tol},
        {"sdp_max_iters", o.sdp.max_iters},
        {"sdp_over_relaxation", o.sdp.over_relaxation},
        {"sdp_initial_penalty", o.sdp.initial_penalty},
        {"sdp_anderson_memory", o.sdp.anderson_memory}}},
      {"run", {{"base_seed", c.base_seed}, {"num_seeds", c.num_seeds}}},
  };
}

// Reads known keys from one section and rejects anything else, so typos in a
// config file do not silently fall back to defaults.
class Section {
public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) throw ConfigError("config section '" + name + "' must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (node_ == nullptr || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + name_ + "." + key + "': " + e.what());
    }
  }

  void read_point(const std::string& key, Point2& p) {
    std::vector<double> v{p.x, p.y};
    read(key, v);
    if (v.size() != 2) throw ConfigError("config key '" + name_ + "." + key + "' must be [x, y]");
    p = {v[0], v[1]};
  }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& [key, _] : node_->items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config key '" + name_ + "." + key + "'");
    }
  }

private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

json to_json(const ScenarioConfig& c) { return to_json_impl(c); }

ScenarioConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  static const std::set<std::string> sections{"geometry", "channel", "power", "noise", "weights",
                                              "selection", "optimizer", "run"};
  for (const auto& [key, _] : j.items()) {
    if (!sections.contains(key)) throw ConfigError("unknown config section '" + key + "'");
  }

  ScenarioConfig c;
  {
    Section s(j, "geometry");
    auto& g = c.geometry;
    s.read_point("bs_position", g.bs_position);
    s.read_point("ris_position", g.ris_position);
    s.read_point("user_center", g.user_center);
    s.read("user_radius", g.user_radius);
    s.read("num_users", g.num_users);
    s.read("num_antennas", g.num_antennas);
    s.read("num_selected", c.num_selected);
    s.read("num_ris_elements", g.num_ris_elements);
    double deg = rad_to_deg(g.target_angle);
    s.read("target_angle_deg", deg);
    g.target_angle = deg_to_rad(deg);
    s.finish();
  }
  {
    Section s(j, "channel");
    s.read("pathloss_ref_db", c.channel.pathloss_ref_db);
    s.read("exponent_direct", c.channel.exponent_direct);
    s.read("exponent_ris", c.channel.exponent_ris);
    s.read("rician_factor", c.channel.rician_factor);
    s.read("d_over_lambda", c.channel.d_over_lambda);
    s.finish();
  }
  {
    Section s(j, "power");
    s.read("total_dbm", c.total_power_dbm);
    s.read("split_ratio", c.split_ratio);
    s.read("radar_ratio", c.radar_ratio);
    s.read("radar_fraction_of_total", c.radar_fraction_of_total);
    s.finish();
  }
  {
    Section s(j, "noise");
    s.read("user_dbm", c.user_noise_dbm);
    s.read("ris_dbm", c.ris_noise_dbm);
    s.finish();
  }
  if (j.contains("weights")) {
    try {
      c.weights = j.at("weights").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key 'weights': ") + e.what());
    }
  }
  {
    Section s(j, "selection");
    std::string mode = to_string(c.as_mode);
    s.read("as_mode", mode);
    c.as_mode = parse_as_mode(mode);
    s.read("population", c.cuckoo.population);
    s.read("max_iters", c.cuckoo.max_iters);
    s.read("levy_exponent", c.cuckoo.levy_exponent);
    s.read("step_scale", c.cuckoo.step_scale);
    s.read("discard_prob", c.cuckoo.discard_prob);
    s.read("stagnation_window", c.cuckoo.stagnation_window);
    s.finish();
  }
  {
    Section s(j, "optimizer");
    auto& o = c.optimizer;
    s.read("max_outer_iters", o.max_outer_iters);
    s.read("wsr_tol", o.wsr_tol);
    s.read("randomizations", o.randomizations);
    s.read("sdp_tol", o.sdp.tol);
    s.read("sdp_kkt_tol", o.sdp.kkt_tol);
    s.read("sdp_max_iters", o.sdp.max_iters);
    s.read("sdp_over_relaxation", o.sdp.over_relaxation);
    s.read("sdp_initial_penalty", o.sdp.initial_penalty);
    s.read("sdp_anderson_memory", o.sdp.anderson_memory);
    s.finish();
  }
  {
    Section s(j, "run");
    s.read("base_seed", c.base_seed);
    s.read("num_seeds", c.num_seeds);
    s.finish();
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string config_hash(const ScenarioConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace arisac
