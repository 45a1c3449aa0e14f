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
//
// arisac: command-line driver for scenario runs, sweeps and beampatterns.
// Exit codes: 0 success, 1 configuration error, 2 runtime/solver failure,
// 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arisac/experiments.hpp"
#include "arisac/ris_fp.hpp"
#include "arisac/wmmse.hpp"

namespace fs = std::filesystem;
using namespace arisac;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kIo = 3 };

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::string out_dir;
  std::string axis;
  std::vector<double> values;
  std::vector<std::string> as_modes;
};

ScenarioConfig load(const Options& o) {
  ScenarioConfig c = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
  if (o.seed) c.base_seed = *o.seed;
  if (o.seeds) c.num_seeds = *o.seeds;
  c.validate();
  return c;
}

std::vector<AsMode> modes_of(const Options& o, const ScenarioConfig& c) {
  if (o.as_modes.empty()) return {c.as_mode};
  std::vector<AsMode> out;
  for (const auto& s : o.as_modes) out.push_back(parse_as_mode(s));
  return out;
}

fs::path out_dir(const Options& o) {
  fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void print_aggregates(const RunReport& rep) {
  for (const auto& a : rep.aggregates()) {
    std::printf("%s%-10s mean_wsr=%s std=%s ok=%d failed=%d\n",
                a.axis_value ? (rep.axis + "=" + format_number(*a.axis_value) + "  ").c_str() : "",
                to_string(a.as_mode).c_str(), format_number(a.mean_wsr).c_str(), format_number(a.std_wsr).c_str(),
                a.ok, a.failed);
  }
}

// Every seed failing means nothing usable was produced.
int report_status(const RunReport& rep) {
  for (const auto& r : rep.rows) {
    if (r.ok) return kOk;
  }
  std::fprintf(stderr, "error: every run failed; first error: %s\n",
               rep.rows.empty() ? "none" : rep.rows.front().error.c_str());
  return kRuntime;
}

int cmd_run(const Options& o) {
  const ScenarioConfig c = load(o);
  const auto modes = modes_of(o, c);
  const auto dir = out_dir(o);
  const RunReport rep = run_scenario(c, modes);
  write_results_csv(rep, (dir / "results.csv").string());
  write_trace_csv(rep, (dir / "trace.csv").string());
  write_summary_json(rep, (dir / "summary.json").string());
  print_aggregates(rep);
  return report_status(rep);
}

int cmd_sweep(const Options& o) {
  if (o.axis.empty()) throw ConfigError("sweep needs --axis");
  if (o.values.empty()) throw ConfigError("sweep needs --values");
  const ScenarioConfig c = load(o);
  const auto modes = modes_of(o, c);
  const auto dir = out_dir(o);
  const RunReport rep = sweep(c, o.axis, o.values, modes);
  const std::string stem = "sweep_" + o.axis;
  write_results_csv(rep, (dir / (stem + ".csv")).string());
  write_trace_csv(rep, (dir / (stem + "_trace.csv")).string());
  write_summary_json(rep, (dir / (stem + ".json")).string());
  print_aggregates(rep);
  return report_status(rep);
}

int cmd_beampattern(const Options& o) {
  const ScenarioConfig c = load(o);
  const auto modes = modes_of(o, c);
  const auto dir = out_dir(o);
  const auto grid = angle_grid_deg();
  for (AsMode m : modes) {
    const SingleRun r = run_single(c, c.base_seed, m);
    if (!r.solution) {
      std::fprintf(stderr, "error: %s run failed: %s\n", to_string(m).c_str(), r.row.error.c_str());
      return kRuntime;
    }
    const auto path = dir / ("beampattern_" + to_string(m) + ".csv");
    emit_beampattern(r.solution->tx, r.solution->subset, grid, c.channel.d_over_lambda, path.string());
    std::printf("%-10s wsr=%s radar_power=%s target=%s -> %s\n", to_string(m).c_str(),
                format_number(r.row.wsr).c_str(), format_number(r.row.radar_power).c_str(),
                format_number(c.budget().radar_target()).c_str(), path.string().c_str());
  }
  return kOk;
}

int cmd_default_config(const Options& o) {
  const std::string text = to_json(ScenarioConfig{}).dump(2) + "\n";
  if (o.out_dir.empty()) {
    std::fputs(text.c_str(), stdout);
    return kOk;
  }
  const auto path = (out_dir(o) / "config.json").string();
  std::ofstream out(path);
  if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
  std::printf("%s\n", path.c_str());
  return kOk;
}

// Quick end-to-end sanity pass over a small instance.
int cmd_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("%s %-28s %s\n", ok ? "ok  " : "FAIL", name, detail.c_str());
    if (!ok) ++failures;
  };

  ScenarioConfig c;
  c.geometry.num_ris_elements = 16;
  c.num_seeds = 1;
  ChannelParams cp = c.channel;
  cp.rng_seed = 7;
  const ChannelSet ch = generate_channels(c.geometry, cp);
  const DesignProblem p = make_design_problem(ch, AntennaSubset::contiguous(c.num_selected, c.geometry.num_antennas),
                                              c.budget(), c.noise(), c.user_weights(), c.geometry.target_angle,
                                              c.channel.d_over_lambda);
  const InitialPoint init = initialize(p, 7);
  const auto h = effective_channels(p.channels, init.ris);
  const auto e = mmse_errors(init.tx, h, p.channels.h_ris, init.ris, p.noise);
  const auto g = sinrs(init.tx, p.channels, init.ris, p.noise);
  double err = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) err = std::max(err, std::abs(e[k] - 1.0 / (1.0 + g[k])));
  check("mmse-error identity", err <= 1e-12, "max dev " + format_number(err));

  OptimizerConfig oc = c.optimizer;
  oc.rng_seed = 7;
  const Solution s = optimize(p, oc);
  bool mono = true;
  for (std::size_t i = 1; i < s.wsr_trace.size(); ++i) mono = mono && s.wsr_trace[i] >= s.wsr_trace[i - 1] - 1e-6;
  check("wsr trace monotone", mono, std::to_string(s.wsr_trace.size()) + " points");
  check("converged", s.converged, std::to_string(s.iterations) + " iterations");
  const auto f = check_feasibility(s.tx, p.steering, p.budget, p.channels.g, s.ris, p.noise.ris_noise);
  check("per-antenna power", f.antenna_error <= 1e-9, "rel err " + format_number(f.antenna_error));
  check("radar power", f.radar_ok(1e-6), format_number(f.radar_power) + " >= " + format_number(f.radar_target));
  check("ris power", f.ris_ok(1e-6), format_number(f.ris_power) + " <= " + format_number(f.ris_budget));
  std::printf("%s\n", failures == 0 ? "selftest passed" : "selftest FAILED");
  return failures == 0 ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-RIS-aided DFRC design: antenna selection, transmit and RIS optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON scenario config (defaults when omitted)");
    sub->add_option("--seed", o.seed, "base seed (overrides run.base_seed)");
    sub->add_option("--seeds", o.seeds, "number of seeds (overrides run.num_seeds)")->check(CLI::PositiveNumber);
    sub->add_option("--as-mode", o.as_modes, "AS modes, comma separated: cuckoo,random,contiguous,full")
        ->delimiter(',');
  };

  auto* run = app.add_subcommand("run", "run every seed; writes results.csv, trace.csv, summary.json");
  add_common(run);
  run->add_option("--out", o.out_dir, "output directory");

  auto* sw = app.add_subcommand("sweep", "sweep one axis; writes sweep_<axis>.csv/_trace.csv/.json");
  add_common(sw);
  sw->add_option("--out", o.out_dir, "output directory");
  sw->add_option("--axis", o.axis, "N, P, eta, rho or Ms")->required();
  sw->add_option("--values", o.values, "ascending comma-separated values")->delimiter(',')->required();

  auto* bp = app.add_subcommand("beampattern", "optimize one seed and write beampattern_<mode>.csv");
  add_common(bp);
  bp->add_option("--out", o.out_dir, "output directory");

  auto* dc = app.add_subcommand("default-config", "print the default config (or write <out>/config.json)");
  dc->add_option("--out", o.out_dir, "output directory");

  app.add_subcommand("selftest", "small end-to-end sanity check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (sw->parsed()) return cmd_sweep(o);
    if (bp->parsed()) return cmd_beampattern(o);
    if (dc->parsed()) return cmd_default_config(o);
    return cmd_selftest();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
}
