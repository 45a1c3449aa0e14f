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
// Acceptance suite: one PASS/FAIL line per criterion, each run at its stated
// tolerance. Exits non-zero if any criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "arisac/experiments.hpp"
#include "arisac/wmmse.hpp"
#include "support.hpp"
#include "temp_dir.hpp"
#include "tx_oracle.hpp"

using namespace arisac;
using namespace arisac::test;

namespace {

constexpr int kSeeds = 20;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) detail = why;
    pass = pass && ok;
  }
};

std::string fmt(double v) { return format_number(v); }

// One-sided exact sign test: P(X >= wins) for X ~ Bin(wins + losses, 1/2).
double sign_test_p(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

struct Paired {
  double mean_a = 0.0, mean_b = 0.0, p = 1.0;
  int wins = 0, losses = 0;
};

Paired compare(const std::vector<double>& a, const std::vector<double>& b) {
  Paired r;
  r.mean_a = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  r.mean_b = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) ++r.wins;
    if (a[i] < b[i]) ++r.losses;
  }
  r.p = sign_test_p(r.wins, r.losses);
  return r;
}

// --- shared default-scenario runs (criteria 1, 2, 3, 9) ---------------------

struct DefaultRuns {
  ScenarioConfig config;
  std::vector<AsMode> modes{AsMode::Cuckoo, AsMode::Random, AsMode::Contiguous};
  std::vector<std::vector<SingleRun>> runs;  // [mode][seed]
};

const DefaultRuns& default_runs() {
  static const DefaultRuns d = [] {
    DefaultRuns r;
    r.config.num_seeds = kSeeds;
    for (AsMode m : r.modes) {
      std::vector<SingleRun> per;
      for (auto s : r.config.seeds()) per.push_back(run_single(r.config, s, m));
      r.runs.push_back(std::move(per));
    }
    return r;
  }();
  return d;
}

DesignProblem problem_for(const ScenarioConfig& c, std::uint64_t seed, const AntennaSubset& subset) {
  ChannelParams cp = c.channel;
  cp.rng_seed = seed;
  const ChannelSet ch = generate_channels(c.geometry, cp);
  return make_design_problem(ch, subset, c.budget(), c.noise(), c.user_weights(), c.geometry.target_angle,
                             c.channel.d_over_lambda);
}

Outcome criterion1() {
  Outcome o;
  const auto& d = default_runs();
  int runs = 0, max_iters = 0;
  for (const auto& per : d.runs) {
    for (const auto& r : per) {
      ++runs;
      const std::string who = to_string(r.row.as_mode) + " seed " + std::to_string(r.row.seed);
      o.require(r.row.ok, who + " failed: " + r.row.error);
      if (!r.row.ok) continue;
      const auto& t = r.row.trace;
      for (std::size_t i = 1; i < t.size(); ++i) {
        o.require(t[i] >= t[i - 1] - 1e-6, who + " trace drops at iteration " + std::to_string(i));
      }
      o.require(r.row.converged && r.row.iters <= 50, who + " did not converge within 50 iterations");
      o.require(t.size() >= 2 && std::abs(t.back() - t[t.size() - 2]) <= 1e-4, who + " last change > 1e-4");
      max_iters = std::max(max_iters, r.row.iters);
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs monotone and converged, max " + std::to_string(max_iters) +
                         " outer iterations";
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto& d = default_runs();
  double worst_antenna = 0.0, worst_radar = 1e300, worst_ris = 0.0;
  for (const auto& per : d.runs) {
    for (const auto& r : per) {
      if (!r.solution) {
        o.require(false, "seed " + std::to_string(r.row.seed) + " has no solution");
        continue;
      }
      const Solution& s = *r.solution;
      const DesignProblem p = problem_for(d.config, r.row.seed, s.subset);
      const auto f = check_feasibility(s.tx, p.steering, p.budget, p.channels.g, s.ris, p.noise.ris_noise);
      worst_antenna = std::max(worst_antenna, f.antenna_error);
      worst_radar = std::min(worst_radar, f.radar_power / f.radar_target);
      worst_ris = std::max(worst_ris, f.ris_power / f.ris_budget);
      const std::string who = to_string(r.row.as_mode) + " seed " + std::to_string(r.row.seed);
      o.require(f.antenna_error <= 1e-9, who + " per-antenna error " + fmt(f.antenna_error));
      o.require(f.radar_power >= f.radar_target * (1 - 1e-6), who + " radar power below target");
      o.require(f.ris_power <= f.ris_budget * (1 + 1e-6), who + " RIS power above budget");
    }
  }
  const std::string summary = "max per-antenna rel err " + fmt(worst_antenna) + ", min radar/target " +
                              fmt(worst_radar) + ", max RIS/budget " + fmt(worst_ris);
  o.detail = o.pass ? summary : o.detail + "; " + summary;
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto& d = default_runs();
  auto column = [&](int m) {
    std::vector<double> v;
    for (const auto& r : d.runs[m]) v.push_back(r.row.ok ? r.row.wsr : 0.0);
    return v;
  };
  const Paired cr = compare(column(0), column(1));
  const Paired rc = compare(column(1), column(2));
  o.require(cr.mean_a >= cr.mean_b, "mean cuckoo < mean random");
  o.require(rc.mean_a >= rc.mean_b, "mean random < mean contiguous");
  o.require(cr.p <= 0.05, "cuckoo > random not significant (p = " + fmt(cr.p) + ")");
  o.require(rc.p <= 0.05, "random > contiguous not significant (p = " + fmt(rc.p) + ")");
  std::ostringstream s;
  s << "means cuckoo " << fmt(cr.mean_a) << " random " << fmt(cr.mean_b) << " contiguous " << fmt(rc.mean_b)
    << "; cuckoo vs random " << cr.wins << "-" << cr.losses << " p=" << fmt(cr.p) << "; random vs contiguous "
    << rc.wins << "-" << rc.losses << " p=" << fmt(rc.p);
  o.detail = o.pass ? s.str() : o.detail + "; " + s.str();
  return o;
}

std::vector<double> sweep_means(const std::string& axis, const std::vector<double>& values) {
  ScenarioConfig c;
  c.num_seeds = kSeeds;
  const std::vector<AsMode> modes{AsMode::Cuckoo};
  const RunReport r = sweep(c, axis, values, modes);
  std::vector<double> means;
  for (double v : values) {
    const auto col = r.wsr_column(v, AsMode::Cuckoo);
    double sum = 0.0;
    for (double w : col) sum += std::isnan(w) ? 0.0 : w;  // a failed seed counts as zero rate
    means.push_back(sum / col.size());
  }
  return means;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt(x);
  return s;
}

Outcome criterion4() {
  Outcome o;
  std::ostringstream s;

  const auto n = sweep_means("N", {16, 36, 64});
  bool ok = std::is_sorted(n.begin(), n.end());
  o.require(ok, "mean WSR not nondecreasing in N");
  s << "N[" << join(n) << "]" << (ok ? "" : "x");

  const auto p = sweep_means("P", {10, 15, 20, 25});
  ok = std::is_sorted(p.begin(), p.end());
  o.require(ok, "mean WSR not nondecreasing in P");
  s << " P[" << join(p) << "]" << (ok ? "" : "x");

  std::vector<double> etas;
  for (int i = 1; i <= 9; ++i) etas.push_back(0.1 * i);
  const auto e = sweep_means("eta", etas);
  int ordered = 0;
  for (std::size_t i = 1; i < e.size(); ++i) ordered += e[i] <= e[i - 1];
  ok = ordered >= 0.9 * (e.size() - 1);
  o.require(ok, "only " + std::to_string(ordered) + "/8 adjacent eta pairs nonincreasing");
  s << " eta[" << join(e) << "] " << ordered << "/8" << (ok ? "" : "x");

  const auto r = sweep_means("rho", {0.6, 0.7, 0.8, 0.9, 1.0});
  const auto best = std::max_element(r.begin(), r.end()) - r.begin();
  ok = best > 0 && best < static_cast<long>(r.size()) - 1;
  o.require(ok, "rho maximum at the boundary (index " + std::to_string(best) + ")");
  s << " rho[" << join(r) << "]" << (ok ? "" : "x");

  o.detail = o.pass ? s.str() : o.detail + "; " + s.str();
  return o;
}

Outcome criterion5() {
  Outcome o;
  ScenarioConfig c;
  c.geometry.num_antennas = 6;
  c.num_selected = 3;
  int hits = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ChannelParams cp = c.channel;
    cp.rng_seed = seed;
    const ChannelSet ch = generate_channels(c.geometry, cp);
    const FitnessProxy f(ch, c.budget(), c.noise(), c.user_weights(), seed);
    double best = 0.0;
    for (unsigned mask = 0; mask < 64; ++mask) {
      if (std::popcount(mask) != 3) continue;
      std::vector<int> idx;
      for (int i = 0; i < 6; ++i) {
        if (mask & (1u << i)) idx.push_back(i);
      }
      best = std::max(best, f(AntennaSubset(idx, 6)));
    }
    CuckooParams p = c.cuckoo;
    p.rng_seed = seed;
    const double got = cuckoo_search(f, 3, p).best.fitness;
    worst = std::min(worst, got / best);
    hits += got >= 0.98 * best;
  }
  o.require(hits >= 9, std::to_string(hits) + "/10 within 2%");
  o.detail = std::to_string(hits) + "/10 within 2% of exhaustive, worst ratio " + fmt(worst) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome criterion6() {
  Outcome o;
  Rng64 rng(606);
  double worst_gap = 0.0, worst_con = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 8;
    const QuadraticForm q = random_qcqp(n, rng, trial % 4 == 0);
    const CVector psi = solve_psi_qcqp(q);
    const CVector ref = oracle_qcqp(q);
    const double gap = std::abs(q.objective(psi) - q.objective(ref)) / std::abs(q.objective(ref));
    const double con = q.constraint(psi) / q.budget - 1.0;
    worst_gap = std::max(worst_gap, gap);
    worst_con = std::max(worst_con, con);
    o.require(gap <= 1e-5, "instance " + std::to_string(trial) + " objective gap " + fmt(gap));
    o.require(con <= 1e-9, "instance " + std::to_string(trial) + " constraint excess " + fmt(con));
  }
  o.detail = "50 instances, max rel gap " + fmt(worst_gap) + ", max rel excess " + fmt(worst_con) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome criterion7() {
  Outcome o;
  Rng64 rng(707);
  double worst_gap = 0.0, worst_kkt = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<CMatrix> w0;
    const int blocks = 1 + trial % 2;
    const int n = 2 + (trial / 2) % 3;
    const BlockSdp p = random_structured_sdp(blocks, n, 1 + trial % 2, rng, w0);
    const double ref = BarrierSdp(p).solve(w0);
    const SdpSolution sol = solve_block_sdp(p);
    const double gap = std::abs(sol.objective - ref) / std::max(std::abs(ref), 1e-12);
    const auto& r = sol.residuals;
    const double kkt = std::max({r.equality, r.inequality, r.cone, r.stationarity, r.gap});
    worst_gap = std::max(worst_gap, gap);
    worst_kkt = std::max(worst_kkt, kkt);
    o.require(sol.status == SdpStatus::Solved, "instance " + std::to_string(trial) + " " + to_string(sol.status));
    o.require(gap <= 1e-4, "instance " + std::to_string(trial) + " objective gap " + fmt(gap));
    o.require(kkt <= 1e-6, "instance " + std::to_string(trial) + " KKT residual " + fmt(kkt));
  }
  double worst_ratio = 1e300;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TxOracleCase c = make_tx_case(seed, 2, 1);
    const TransmitContext ctx = c.context();
    const double best = grid_oracle_wsr(c, ctx);
    TransmitBeamformer t = c.feasible_start();
    double got = 0.0;
    for (int it = 0; it < 50; ++it) {
      const TransmitUpdate u = update_transmit_beamformer(t, ctx);
      const bool done = std::abs(u.wsr_after - got) < 1e-12;
      t = u.tx;
      got = u.wsr_after;
      if (done) break;
    }
    worst_ratio = std::min(worst_ratio, got / best);
    o.require(got >= 0.99 * best, "K=1 Ms=2 seed " + std::to_string(seed) + " reaches " + fmt(got / best) +
                                      " of the grid optimum");
  }
  o.detail = "30 SDPs, max rel gap " + fmt(worst_gap) + ", max KKT residual " + fmt(worst_kkt) +
             "; K=1 Ms=2 worst ratio to grid " + fmt(worst_ratio) + (o.pass ? "" : "; " + o.detail);
  return o;
}

Outcome criterion8() {
  Outcome o;
  Rng64 rng(808);
  double worst = 0.0;
  auto track = [&](double err, const std::string& what) {
    worst = std::max(worst, err);
    o.require(err <= 1e-9, what + " deviates by " + fmt(err));
  };
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_instance(4, 6, 8, rng);
    const auto h = effective_channels(in.ch, in.ris);
    const auto e = mmse_errors(in.tx, h, in.ch.h_ris, in.ris, in.noise);
    const auto g = sinrs(in.tx, in.ch, in.ris, in.noise);
    for (int k = 0; k < 4; ++k) {
      const double ref = oracle_sinr(k, in.tx.t, in.ch, in.ris.psi, in.noise.ris_noise, in.noise.user(k));
      track(std::abs(e[k] - 1.0 / (1.0 + ref)), "e_k = 1/(1+gamma_k)");
    }
    const auto alpha = update_alpha(g);
    const double r = wsr_from_sinr(g, in.mu);
    track(rel_err(dual_transform_objective(alpha, g, in.mu), r), "dual transform at alpha*");
    const auto eps = update_epsilon(in.tx, in.ch, in.ris, in.noise, in.mu, alpha);
    double qref = 0.0;
    for (int k = 0; k < 4; ++k) qref += in.mu[k] * (1 + alpha[k]) * g[k] / (1 + g[k]);
    track(rel_err(quadratic_transform_objective(in.tx, in.ch, in.ris, in.noise, in.mu, alpha, eps), qref),
          "quadratic transform at eps*");

    const auto q = assemble_quadratic(in.tx, in.ch, eps, alpha, in.mu, in.noise.ris_noise, 1.0);
    const double h0 = oracle_h(in, CVector::Zero(8), eps, alpha);
    const CVector psi = random_vector(8, rng);
    const double direct = oracle_h(in, psi, eps, alpha) - h0;
    track(std::abs(q.objective(psi) - direct) / std::max(1.0, std::abs(direct)), "separation");
    const double quad = (psi.adjoint() * q.pi * psi)(0).real();
    track(rel_err(ris_power(in.tx, in.ch.g, {psi}, in.noise.ris_noise), quad), "ris_power = psi^H Pi psi");
  }
  o.detail = "50 instances, max deviation " + fmt(worst) + (o.pass ? "" : "; " + o.detail);
  return o;
}

std::vector<double> read_power_column(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<double> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) out.push_back(std::stod(line.substr(line.find(',') + 1)));
  return out;
}

Outcome criterion9() {
  Outcome o;
  const auto& d = default_runs();
  const auto grid = angle_grid_deg();
  const double phi_deg = rad_to_deg(d.config.geometry.target_angle);
  const auto at_phi = std::min_element(grid.begin(), grid.end(), [&](double a, double b) {
                        return std::abs(a - phi_deg) < std::abs(b - phi_deg);
                      }) - grid.begin();
  TempDir dir("acceptance");
  double worst = 1e300;
  int checked = 0;
  for (const auto& r : d.runs[0]) {
    if (!r.solution) continue;
    const Solution& s = *r.solution;
    const auto path = dir.path / ("bp_" + std::to_string(r.row.seed) + ".csv");
    emit_beampattern(s.tx, s.subset, grid, d.config.channel.d_over_lambda, path.string());
    const auto from_file = read_power_column(path);
    std::vector<double> grid_rad;
    for (double g : grid) grid_rad.push_back(deg_to_rad(g));
    const auto direct = beampattern(s.tx, s.subset, grid_rad, d.config.channel.d_over_lambda, ExecPolicy::Serial);
    o.require(from_file == direct, "seed " + std::to_string(r.row.seed) + " CSV differs from the evaluation");
    const double target = d.config.budget().radar_target();
    const double probe = from_file[static_cast<std::size_t>(at_phi)];
    worst = std::min(worst, probe / target);
    o.require(probe >= target * (1 - 1e-6), "seed " + std::to_string(r.row.seed) + " probing power below target");
    ++checked;
  }
  o.require(checked == kSeeds, "only " + std::to_string(checked) + " solutions");
  o.detail = std::to_string(checked) + " cuckoo solutions, CSV bit-identical, min power(phi)/target " + fmt(worst) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"convergence", criterion1},        {"constraint satisfaction", criterion2},
      {"AS ordering", criterion3},        {"trend suite", criterion4},
      {"cuckoo vs exhaustive", criterion5}, {"QCQP oracle", criterion6},
      {"SDP oracle", criterion7},         {"identity suite", criterion8},
      {"beampattern", criterion9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
