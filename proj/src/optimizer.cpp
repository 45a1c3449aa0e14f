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

#include "arisac/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "arisac/wmmse.hpp"

namespace arisac {

void OptimizerConfig::validate() const {
  if (max_outer_iters < 1) throw ConfigError("max_outer_iters must be >= 1");
  if (!(wsr_tol > 0.0)) throw ConfigError("wsr_tol must be > 0");
  if (!(sdp.tol > 0.0)) throw ConfigError("SDP tolerance must be > 0");
  if (!(sdp.kkt_tol > 0.0)) throw ConfigError("SDP KKT tolerance must be > 0");
  if (sdp.max_iters < 1) throw ConfigError("SDP max_iters must be >= 1");
  if (!(sdp.over_relaxation > 0.0 && sdp.over_relaxation < 2.0)) {
    throw ConfigError("SDP over-relaxation must lie in (0, 2)");
  }
  if (randomizations < 0) throw ConfigError("randomizations must be >= 0");
}

DesignProblem make_design_problem(const ChannelSet& channels, const AntennaSubset& subset, const PowerBudget& budget,
                                  const NoiseModel& noise, std::vector<double> mu, double target_angle,
                                  double d_over_lambda) {
  budget.validate();
  noise.validate(channels.num_users());
  if (static_cast<int>(mu.size()) != channels.num_users()) throw ConfigError("one weight mu_k per user");
  for (double w : mu) {
    if (!(w >= 0.0)) throw ConfigError("user weights must be >= 0");
  }
  DesignProblem p;
  p.subset = subset;
  p.channels = select_subchannels(channels, subset);
  p.steering = steering_vector(target_angle, subset, d_over_lambda);
  p.budget = budget;
  p.noise = noise;
  p.mu = std::move(mu);
  return p;
}

InitialPoint initialize(const DesignProblem& problem, std::uint64_t seed) {
  const SelectedChannels& ch = problem.channels;
  const double ps = problem.budget.dfrc();
  std::mt19937_64 rng(derive_seed(seed, Stream::OptimizerInit));
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  CVector dir(ch.num_ris_elements());
  for (Eigen::Index n = 0; n < dir.size(); ++n) dir(n) = std::polar(1.0, phase(rng));

  const TransmitBeamformer matched = matched_beamformer(effective_channels(ch, RisState{dir}), ps);
  const CMatrix beam = problem.steering * Eigen::RowVectorXcd::Constant(
                                              ch.num_users(), std::sqrt(ps / (ch.num_selected() * ch.num_users())));
  const double target = problem.budget.radar_target();

  InitialPoint init;
  init.tx = matched;
  if (radar_power(matched, problem.steering) < target) {
    // The pure radar beam reaches Pr = Ps; bisect the smallest blend that
    // meets the target.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto t = repair_per_antenna((1.0 - mid) * matched.t + mid * beam, ps);
      if (radar_power(t, problem.steering) >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    init.tx = repair_per_antenna((1.0 - hi) * matched.t + hi * beam, ps);
  }
  init.ris = scale_to_budget(dir, init.tx, ch.g, problem.noise.ris_noise, problem.budget.ris());
  return init;
}

Solution optimize(const DesignProblem& problem, const OptimizerConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SelectedChannels& ch = problem.channels;

  InitialPoint init = initialize(problem, config.rng_seed);
  Solution sol;
  sol.subset = problem.subset;
  sol.tx = init.tx;
  sol.ris = init.ris;
  double r = wsr(sol.tx, ch, sol.ris, problem.noise, problem.mu);
  sol.wsr_trace.push_back(r);

  TransmitContext ctx;
  ctx.channels = &ch;
  ctx.noise = problem.noise;
  ctx.mu = problem.mu;
  ctx.steering = problem.steering;
  ctx.budget = problem.budget;
  ctx.randomizations = config.randomizations;

  int failures_in_row = 0;
  for (int it = 1; it <= config.max_outer_iters; ++it) {
    ctx.ris = sol.ris;
    ctx.seed = derive_seed(config.rng_seed, static_cast<std::uint64_t>(it));
    try {
      const TransmitUpdate up = update_transmit_beamformer(sol.tx, ctx, config.sdp);
      sol.tx = up.tx;
      sol.sdp_iterations += up.sdp_iterations;
      if (up.kept_previous) ++sol.kept_transmit;
      if (up.method != RecoveryMethod::Eigen) ++sol.recovery_fallbacks;
      failures_in_row = 0;
    } catch (const SolverError& e) {
      if (++failures_in_row > 1) {
        std::ostringstream os;
        os << "outer iteration " << it << ": transmit update failed twice in a row: " << e.what();
        throw SolverError(os.str());
      }
    }

    const double r_mid = wsr(sol.tx, ch, sol.ris, problem.noise, problem.mu);
    const RisState next = ris_fp_pass(sol.tx, ch, sol.ris, problem.noise, problem.mu, problem.budget.ris());
    if (!next.psi.allFinite()) {
      std::ostringstream os;
      os << "outer iteration " << it << ": RIS update produced non-finite coefficients";
      throw SolverError(os.str());
    }
    const double r_next = wsr(sol.tx, ch, next, problem.noise, problem.mu);
    if (r_next >= r_mid) {
      sol.ris = next;
    } else {
      ++sol.kept_ris;
    }

    const double r_new = std::max(r_next, r_mid);
    sol.wsr_trace.push_back(r_new);
    sol.iterations = it;
    const bool done = std::abs(r_new - r) <= config.wsr_tol;
    r = r_new;
    if (done) {
      sol.converged = true;
      break;
    }
  }

  sol.wsr = r;
  sol.polar = split_psi(sol.ris.psi);
  sol.radar_power = radar_power(sol.tx, problem.steering);
  sol.ris_power = ris_power(sol.tx, ch.g, sol.ris, problem.noise.ris_noise);
  sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace arisac
