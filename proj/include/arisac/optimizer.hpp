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
#include <vector>

#include "arisac/channel.hpp"
#include "arisac/metrics.hpp"
#include "arisac/ris_fp.hpp"
#include "arisac/sdp.hpp"

namespace arisac {

struct OptimizerConfig {
  int max_outer_iters = 50;
  double wsr_tol = 1e-4;
  SdpSettings sdp;
  int randomizations = 100;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// One antenna subset's design problem: selected channels plus all budgets.
struct DesignProblem {
  AntennaSubset subset;
  SelectedChannels channels;
  CVector steering;
  PowerBudget budget;
  NoiseModel noise;
  std::vector<double> mu;
};

DesignProblem make_design_problem(const ChannelSet& channels, const AntennaSubset& subset, const PowerBudget& budget,
                                  const NoiseModel& noise, std::vector<double> mu, double target_angle,
                                  double d_over_lambda);

struct InitialPoint {
  TransmitBeamformer tx;
  RisState ris;
};

/// Matched T with exact per-antenna power, blended toward the radar beam just
/// enough to meet the probing-power target; random-phase psi scaled so the
/// RIS power constraint is tight.
InitialPoint initialize(const DesignProblem& problem, std::uint64_t seed);

struct Solution {
  AntennaSubset subset;
  TransmitBeamformer tx;
  RisState ris;
  PolarRis polar;
  std::vector<double> wsr_trace;  // entry 0: initial point
  double wsr = 0.0;
  double radar_power = 0.0;
  double ris_power = 0.0;
  int iterations = 0;
  bool converged = false;
  int kept_transmit = 0;    // T updates rejected by the WSR guard
  int kept_ris = 0;         // psi updates rejected by the WSR guard
  int recovery_fallbacks = 0;
  long sdp_iterations = 0;
  double wall_ms = 0.0;
};

/// Alternates T (WMMSE/SDR) and psi (FP/QCQP) updates until the WSR changes
/// by at most wsr_tol or max_outer_iters is reached.
Solution optimize(const DesignProblem& problem, const OptimizerConfig& config);

}  // namespace arisac
