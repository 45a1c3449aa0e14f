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
#include <map>
#include <random>
#include <span>
#include <vector>

#include "arisac/channel.hpp"
#include "arisac/common.hpp"
#include "arisac/metrics.hpp"

namespace arisac {

using Rng = std::mt19937_64;

struct CuckooParams {
  int population = 15;
  int max_iters = 50;
  double levy_exponent = 1.5;  // delta
  double step_scale = 1.0;     // alpha
  double discard_prob = 0.25;  // p
  int stagnation_window = 10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Nest {
  AntennaSubset subset;
  double fitness = 0.0;
};

/// sigma_u = {Gamma(1+d) sin(pi d/2) / (Gamma((1+d)/2) d 2^((d-1)/2))}^(1/d)
double levy_sigma(double delta);

/// u / |s|^(1/delta), u ~ N(0, sigma_u^2), s ~ N(0, 1)
double levy_step(double delta, Rng& rng);

std::vector<double> levy_update(std::span<const int> nest, double step_scale, double delta, Rng& rng);

/// C_l + gamma .* H(p - zeta) .* (C_j - C_k), gamma and zeta uniform per coordinate
std::vector<double> local_random_update(std::span<const double> c_l, std::span<const double> c_j,
                                        std::span<const double> c_k, double p, Rng& rng);

/// floor, clamp to [0, M-1], replace duplicates with random unused indices, sort
AntennaSubset repair(std::span<const double> raw, int num_antennas, Rng& rng);

/// Selection-time WSR proxy: matched-filter T on the effective channels of a
/// fixed random-phase RIS scaled to its budget, followed by one RIS
/// fractional-programming pass.
class FitnessProxy {
public:
  FitnessProxy(const ChannelSet& channels, const PowerBudget& budget, const NoiseModel& noise,
               std::vector<double> weights, std::uint64_t seed);

  double operator()(const AntennaSubset& subset) const;
  int num_antennas() const { return channels_->num_antennas(); }

private:
  const ChannelSet* channels_;
  PowerBudget budget_;
  NoiseModel noise_;
  std::vector<double> weights_;
  CVector phases_;
};

struct CuckooResult {
  Nest best;
  std::vector<double> best_trace;  // entry 0 is the initial population
  int iterations = 0;
  int evaluations = 0;             // distinct subsets evaluated
};

/// Fitness calls inside one population step are independent; `policy`
/// selects serial or OpenMP evaluation. Both give identical results.
CuckooResult cuckoo_search(const FitnessProxy& fitness, int num_selected, const CuckooParams& params,
                           ExecPolicy policy = ExecPolicy::Parallel);

/// Uniformly random Ms-subset.
AntennaSubset random_subset(int num_selected, int num_antennas, Rng& rng);

}  // namespace arisac
