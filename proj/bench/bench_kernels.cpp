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
// Serial reference vs OpenMP for the three parallel kernels: cuckoo fitness
// evaluation, the beampattern grid and seed batches.

#include <benchmark/benchmark.h>

#include "arisac/experiments.hpp"

using namespace arisac;

namespace {

ExecPolicy policy_of(const benchmark::State& s) { return s.range(0) ? ExecPolicy::Parallel : ExecPolicy::Serial; }

void BM_CuckooSearch(benchmark::State& state) {
  ScenarioConfig c;
  ChannelParams cp = c.channel;
  cp.rng_seed = 1;
  const ChannelSet ch = generate_channels(c.geometry, cp);
  const FitnessProxy f(ch, c.budget(), c.noise(), c.user_weights(), 1);
  CuckooParams p = c.cuckoo;
  p.rng_seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(cuckoo_search(f, c.num_selected, p, policy_of(state)));
}

void BM_Beampattern(benchmark::State& state) {
  const auto sub = AntennaSubset::contiguous(6, 8);
  CMatrix t(6, 4);
  for (int i = 0; i < t.size(); ++i) t(i) = std::polar(1.0, 0.37 * i);
  const TransmitBeamformer tx{t};
  std::vector<double> grid;
  for (int i = 0; i < 18001; ++i) grid.push_back(deg_to_rad(-90.0 + 0.01 * i));
  for (auto _ : state) benchmark::DoNotOptimize(beampattern(tx, sub, grid, 0.5, policy_of(state)));
}

void BM_SeedBatch(benchmark::State& state) {
  ScenarioConfig c;
  c.geometry.num_ris_elements = 16;
  c.num_seeds = 4;
  const std::vector<AsMode> modes{AsMode::Contiguous};
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c, modes, policy_of(state)));
}

}  // namespace

// Arg(0) = serial reference, Arg(1) = OpenMP
BENCHMARK(BM_CuckooSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Beampattern)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SeedBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
