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

#include "arisac/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace arisac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string subset_text(const AntennaSubset& s) {
  std::string out;
  for (int i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(s[i]);
  }
  return out;
}

bool same_axis(const std::optional<double>& a, const std::optional<double>& b) {
  return a.has_value() == b.has_value() && (!a || *a == *b);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::vector<Aggregate> RunReport::aggregates() const {
  std::vector<Aggregate> out;
  std::vector<std::optional<double>> axes;
  if (axis_values.empty()) {
    axes.push_back(std::nullopt);
  } else {
    axes.assign(axis_values.begin(), axis_values.end());
  }
  for (const auto& a : axes) {
    for (AsMode m : modes) {
      Aggregate g;
      g.axis_value = a;
      g.as_mode = m;
      std::vector<double> v;
      for (const auto& r : rows) {
        if (!same_axis(r.axis_value, a) || r.as_mode != m) continue;
        if (r.ok) {
          v.push_back(r.wsr);
        } else {
          ++g.failed;
        }
      }
      g.ok = static_cast<int>(v.size());
      if (!v.empty()) {
        double s = 0.0;
        for (double x : v) s += x;
        g.mean_wsr = s / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - g.mean_wsr) * (x - g.mean_wsr);
        g.std_wsr = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      } else {
        g.mean_wsr = g.std_wsr = kNaN;
      }
      out.push_back(g);
    }
  }
  return out;
}

std::vector<double> RunReport::wsr_column(std::optional<double> axis_value, AsMode mode) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (same_axis(r.axis_value, axis_value) && r.as_mode == mode) out.push_back(r.ok ? r.wsr : kNaN);
  }
  return out;
}

AntennaSubset select_antennas(const ScenarioConfig& config, const ChannelSet& channels, std::uint64_t seed,
                              AsMode mode, ExecPolicy policy) {
  const int m = config.geometry.num_antennas;
  const int ms = config.num_selected;
  switch (mode) {
    case AsMode::Full:
      if (ms != m) throw ConfigError("AS mode 'full' requires num_selected == num_antennas");
      return AntennaSubset::full(m);
    case AsMode::Contiguous:
      return AntennaSubset::contiguous(ms, m);
    case AsMode::Random: {
      Rng rng(derive_seed(seed, Stream::RandomSubset));
      return random_subset(ms, m, rng);
    }
    case AsMode::Cuckoo: {
      const FitnessProxy fitness(channels, config.budget(), config.noise(), config.user_weights(), seed);
      CuckooParams p = config.cuckoo;
      p.rng_seed = seed;
      return cuckoo_search(fitness, ms, p, policy).best.subset;
    }
  }
  throw ConfigError("unknown AS mode");
}

SingleRun run_single(const ScenarioConfig& config, std::uint64_t seed, AsMode mode, std::optional<double> axis_value) {
  SingleRun out;
  RunRow& row = out.row;
  row.axis_value = axis_value;
  row.seed = seed;
  row.as_mode = mode;
  try {
    ChannelParams cp = config.channel;
    cp.rng_seed = seed;
    const ChannelSet channels = generate_channels(config.geometry, cp);
    const AntennaSubset subset = select_antennas(config, channels, seed, mode);
    row.subset = subset_text(subset);
    const DesignProblem problem =
        make_design_problem(channels, subset, config.budget(), config.noise(), config.user_weights(),
                            config.geometry.target_angle, config.channel.d_over_lambda);
    OptimizerConfig oc = config.optimizer;
    oc.rng_seed = seed;
    Solution sol = optimize(problem, oc);
    row.ok = true;
    row.wsr = sol.wsr;
    row.radar_power = sol.radar_power;
    row.ris_power = sol.ris_power;
    row.iters = sol.iterations;
    row.converged = sol.converged;
    row.wall_ms = sol.wall_ms;
    row.trace = sol.wsr_trace;
    out.solution = std::move(sol);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
    row.wsr = row.radar_power = row.ris_power = kNaN;
  }
  return out;
}

namespace {

struct Task {
  const ScenarioConfig* config;
  std::optional<double> axis_value;
  AsMode mode;
  std::uint64_t seed;
};

std::vector<RunRow> run_tasks(const std::vector<Task>& tasks, ExecPolicy policy) {
  std::vector<RunRow> rows(tasks.size());
  const auto n = static_cast<long>(tasks.size());
  if (policy == ExecPolicy::Parallel) {
    // Configuration errors are systematic; they are rethrown after the loop
    // because exceptions may not escape an OpenMP region.
    std::vector<std::string> config_errors(tasks.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      const Task& t = tasks[static_cast<std::size_t>(i)];
      try {
        rows[static_cast<std::size_t>(i)] = run_single(*t.config, t.seed, t.mode, t.axis_value).row;
      } catch (const ConfigError& e) {
        config_errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
    for (const auto& e : config_errors) {
      if (!e.empty()) throw ConfigError(e);
    }
  } else {
    for (long i = 0; i < n; ++i) {
      const Task& t = tasks[static_cast<std::size_t>(i)];
      rows[static_cast<std::size_t>(i)] = run_single(*t.config, t.seed, t.mode, t.axis_value).row;
    }
  }
  return rows;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, std::span<const AsMode> modes, ExecPolicy policy) {
  config.validate();
  RunReport rep;
  rep.seeds = config.seeds();
  rep.modes.assign(modes.begin(), modes.end());
  rep.config_hash = config_hash(config);
  rep.config = to_json(config);
  std::vector<Task> tasks;
  for (AsMode m : modes) {
    for (auto s : rep.seeds) tasks.push_back({&config, std::nullopt, m, s});
  }
  rep.rows = run_tasks(tasks, policy);
  return rep;
}

ScenarioConfig apply_axis(const ScenarioConfig& config, const std::string& axis, double value) {
  ScenarioConfig c = config;
  auto as_int = [&](double v) {
    if (v != std::floor(v) || v < 1.0) throw ConfigError("axis '" + axis + "' needs positive integer values");
    return static_cast<int>(v);
  };
  if (axis == "N") {
    c.geometry.num_ris_elements = as_int(value);
  } else if (axis == "P") {
    c.total_power_dbm = value;
  } else if (axis == "eta") {
    c.radar_ratio = value;
  } else if (axis == "rho") {
    c.split_ratio = value;
    c.radar_ratio = std::min(1.0, c.radar_fraction_of_total / value);
  } else if (axis == "Ms") {
    c.num_selected = as_int(value);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (expected N, P, eta, rho or Ms)");
  }
  c.validate();
  return c;
}

RunReport sweep(const ScenarioConfig& config, const std::string& axis, std::span<const double> values,
                std::span<const AsMode> modes, ExecPolicy policy) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (!std::is_sorted(values.begin(), values.end())) throw ConfigError("sweep values must be sorted ascending");
  config.validate();
  std::vector<ScenarioConfig> configs;
  for (double v : values) configs.push_back(apply_axis(config, axis, v));

  RunReport rep;
  rep.axis = axis;
  rep.axis_values.assign(values.begin(), values.end());
  rep.seeds = config.seeds();
  rep.modes.assign(modes.begin(), modes.end());
  rep.config_hash = config_hash(config);
  rep.config = to_json(config);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (AsMode m : modes) {
      for (auto s : rep.seeds) tasks.push_back({&configs[i], values[i], m, s});
    }
  }
  rep.rows = run_tasks(tasks, policy);
  return rep;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_results_csv(const RunReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "axis_value,seed,as_mode,wsr_bits,radar_power_w,ris_power_w,iters,wall_ms,converged,status,subset,"
         "config_hash\n";
  for (const auto& r : report.rows) {
    std::string status = r.ok ? "ok" : "failed: " + r.error;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << (r.axis_value ? format_number(*r.axis_value) : "") << ',' << r.seed << ',' << to_string(r.as_mode) << ','
        << format_number(r.wsr) << ',' << format_number(r.radar_power) << ',' << format_number(r.ris_power) << ','
        << r.iters << ',' << format_number(r.wall_ms) << ',' << (r.converged ? 1 : 0) << ',' << status << ','
        << r.subset << ',' << report.config_hash << '\n';
  }
  close_out(out, path);
}

void write_trace_csv(const RunReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "seed,iter,wsr_bits,as_mode,axis_value\n";
  for (const auto& r : report.rows) {
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      out << r.seed << ',' << i << ',' << format_number(r.trace[i]) << ',' << to_string(r.as_mode) << ','
          << (r.axis_value ? format_number(*r.axis_value) : "") << '\n';
    }
  }
  close_out(out, path);
}

void write_summary_json(const RunReport& report, const std::string& path) {
  nlohmann::json j;
  j["axis"] = report.axis;
  j["axis_values"] = report.axis_values;
  j["seeds"] = report.seeds;
  std::vector<std::string> modes;
  for (AsMode m : report.modes) modes.push_back(to_string(m));
  j["as_modes"] = modes;
  j["config_hash"] = report.config_hash;
  j["code_version"] = kVersion;
  j["config"] = report.config;
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : report.aggregates()) {
    nlohmann::json e;
    e["axis_value"] = a.axis_value ? nlohmann::json(*a.axis_value) : nlohmann::json(nullptr);
    e["as_mode"] = to_string(a.as_mode);
    e["mean_wsr_bits"] = std::isnan(a.mean_wsr) ? nlohmann::json(nullptr) : nlohmann::json(a.mean_wsr);
    e["std_wsr_bits"] = std::isnan(a.std_wsr) ? nlohmann::json(nullptr) : nlohmann::json(a.std_wsr);
    e["ok"] = a.ok;
    e["failed"] = a.failed;
    j["aggregates"].push_back(e);
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  close_out(out, path);
}

std::vector<double> angle_grid_deg(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw ConfigError("angle grid needs step > 0 and stop >= start");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = start + static_cast<double>(i) * step;
  return out;
}

void emit_beampattern(const TransmitBeamformer& tx, const AntennaSubset& subset, std::span<const double> grid_deg,
                      double d_over_lambda, const std::string& path) {
  std::vector<double> rad(grid_deg.size());
  std::transform(grid_deg.begin(), grid_deg.end(), rad.begin(), deg_to_rad);
  const auto p = beampattern(tx, subset, rad, d_over_lambda);
  auto out = open_out(path);
  out << "angle_deg,power_w\n";
  char buf[64];
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto r = std::to_chars(buf, buf + sizeof buf, grid_deg[i]);
    out.write(buf, r.ptr - buf);
    out << ',';
    r = std::to_chars(buf, buf + sizeof buf, p[i]);
    out.write(buf, r.ptr - buf);
    out << '\n';
  }
  close_out(out, path);
}

}  // namespace arisac
