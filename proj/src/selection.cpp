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

#include "arisac/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arisac/ris_fp.hpp"
#include "arisac/wmmse.hpp"

namespace arisac {

void CuckooParams::validate() const {
  if (population < 2) throw ConfigError("cuckoo population must be >= 2");
  if (max_iters < 1) throw ConfigError("cuckoo max_iters must be >= 1");
  if (!(levy_exponent > 0.0 && levy_exponent < 2.0)) throw ConfigError("Levy exponent must lie in (0, 2)");
  if (!(step_scale > 0.0)) throw ConfigError("cuckoo step scale must be > 0");
  if (!(discard_prob >= 0.0 && discard_prob <= 1.0)) throw ConfigError("discard probability must lie in [0, 1]");
  if (stagnation_window < 1) throw ConfigError("stagnation window must be >= 1");
}

double levy_sigma(double delta) {
  if (!(delta > 0.0 && delta < 2.0)) throw std::invalid_argument("levy_sigma: delta must lie in (0, 2)");
  const double num = std::tgamma(1.0 + delta) * std::sin(kPi * delta / 2.0);
  const double den = std::tgamma((1.0 + delta) / 2.0) * delta * std::pow(2.0, (delta - 1.0) / 2.0);
  return std::pow(num / den, 1.0 / delta);
}

double levy_step(double delta, Rng& rng) {
  const double sigma = levy_sigma(delta);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double u = sigma * normal(rng);
  for (;;) {
    const double s = std::abs(normal(rng));
    const double den = std::pow(s, 1.0 / delta);
    if (den > 0.0) return u / den;
  }
}

std::vector<double> levy_update(std::span<const int> nest, double step_scale, double delta, Rng& rng) {
  std::vector<double> out(nest.size());
  for (std::size_t i = 0; i < nest.size(); ++i) out[i] = nest[i] + step_scale * levy_step(delta, rng);
  return out;
}

std::vector<double> local_random_update(std::span<const double> c_l, std::span<const double> c_j,
                                        std::span<const double> c_k, double p, Rng& rng) {
  if (c_j.size() != c_l.size() || c_k.size() != c_l.size()) {
    throw std::invalid_argument("local_random_update: nests differ in length");
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> out(c_l.size());
  for (std::size_t i = 0; i < c_l.size(); ++i) {
    const double gamma = uniform(rng);
    const double zeta = uniform(rng);
    const double step = (p - zeta) > 0.0 ? 1.0 : 0.0;
    out[i] = c_l[i] + gamma * step * (c_j[i] - c_k[i]);
  }
  return out;
}

AntennaSubset repair(std::span<const double> raw, int num_antennas, Rng& rng) {
  if (static_cast<int>(raw.size()) > num_antennas) throw std::invalid_argument("repair: more slots than antennas");
  const double top = num_antennas - 1;
  std::vector<int> idx;
  std::vector<bool> used(static_cast<std::size_t>(num_antennas), false);
  std::vector<std::size_t> dup_slots;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double v = std::floor(raw[i]);
    if (std::isnan(v)) v = 0.0;
    v = std::clamp(v, 0.0, top);
    const int m = static_cast<int>(v);
    if (used[static_cast<std::size_t>(m)]) {
      dup_slots.push_back(i);
      idx.push_back(-1);
    } else {
      used[static_cast<std::size_t>(m)] = true;
      idx.push_back(m);
    }
  }
  for (std::size_t slot : dup_slots) {
    std::vector<int> free;
    for (int m = 0; m < num_antennas; ++m) {
      if (!used[static_cast<std::size_t>(m)]) free.push_back(m);
    }
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const int m = free[pick(rng)];
    used[static_cast<std::size_t>(m)] = true;
    idx[slot] = m;
  }
  std::sort(idx.begin(), idx.end());
  return AntennaSubset(std::move(idx), num_antennas);
}

AntennaSubset random_subset(int num_selected, int num_antennas, Rng& rng) {
  if (num_selected < 1 || num_selected > num_antennas) throw ConfigError("random_subset: need 1 <= Ms <= M");
  std::vector<int> all(static_cast<std::size_t>(num_antennas));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(num_selected));
  std::sort(all.begin(), all.end());
  return AntennaSubset(std::move(all), num_antennas);
}

FitnessProxy::FitnessProxy(const ChannelSet& channels, const PowerBudget& budget, const NoiseModel& noise,
                           std::vector<double> weights, std::uint64_t seed)
    : channels_(&channels), budget_(budget), noise_(noise), weights_(std::move(weights)) {
  Rng rng(derive_seed(seed, Stream::FitnessPsi));
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  phases_.resize(channels.num_ris_elements());
  for (Eigen::Index n = 0; n < phases_.size(); ++n) phases_(n) = std::polar(1.0, phase(rng));
}

double FitnessProxy::operator()(const AntennaSubset& subset) const {
  const SelectedChannels ch = select_subchannels(*channels_, subset);
  const auto h = effective_channels(ch, RisState{phases_});
  const TransmitBeamformer tx = matched_beamformer(h, budget_.dfrc());
  const RisState ris0 = scale_to_budget(phases_, tx, ch.g, noise_.ris_noise, budget_.ris());
  const RisState ris1 = ris_fp_pass(tx, ch, ris0, noise_, weights_, budget_.ris());
  return wsr(tx, ch, ris1, noise_, weights_);
}

namespace {

std::vector<double> as_real(const AntennaSubset& s) { return {s.indices().begin(), s.indices().end()}; }

// Evaluates every subset not yet in the cache. The cache is only written
// after the (possibly parallel) evaluation loop, so results do not depend on
// scheduling.
void evaluate(const FitnessProxy& fitness, const std::vector<AntennaSubset>& cands,
              std::map<AntennaSubset, double>& cache, ExecPolicy policy) {
  std::vector<AntennaSubset> todo;
  for (const auto& c : cands) {
    if (!cache.contains(c) && std::find(todo.begin(), todo.end(), c) == todo.end()) todo.push_back(c);
  }
  std::vector<double> vals(todo.size());
  const auto n = static_cast<long>(todo.size());
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = fitness(todo[static_cast<std::size_t>(i)]);
  } else {
    for (long i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = fitness(todo[static_cast<std::size_t>(i)]);
  }
  for (std::size_t i = 0; i < todo.size(); ++i) cache.emplace(todo[i], vals[i]);
}

}  // namespace

CuckooResult cuckoo_search(const FitnessProxy& fitness, int num_selected, const CuckooParams& params,
                           ExecPolicy policy) {
  params.validate();
  const int m = fitness.num_antennas();
  if (num_selected < 1 || num_selected > m) throw ConfigError("cuckoo_search: need 1 <= Ms <= M");

  CuckooResult out;
  std::map<AntennaSubset, double> cache;
  if (num_selected == m) {
    const auto full = AntennaSubset::full(m);
    out.best = {full, fitness(full)};
    out.best_trace.push_back(out.best.fitness);
    out.evaluations = 1;
    return out;
  }

  const auto l_count = static_cast<std::size_t>(params.population);
  const std::uint64_t base = derive_seed(params.rng_seed, Stream::Cuckoo);
  std::vector<Rng> rngs;
  for (std::size_t l = 0; l < l_count; ++l) rngs.emplace_back(derive_seed(base, l));

  std::vector<Nest> nests(l_count);
  {
    std::vector<AntennaSubset> init;
    for (std::size_t l = 0; l < l_count; ++l) init.push_back(random_subset(num_selected, m, rngs[l]));
    evaluate(fitness, init, cache, policy);
    for (std::size_t l = 0; l < l_count; ++l) nests[l] = {init[l], cache.at(init[l])};
  }
  auto best_of = [&]() {
    return *std::max_element(nests.begin(), nests.end(),
                             [](const Nest& a, const Nest& b) { return a.fitness < b.fitness; });
  };
  auto accept = [&](const std::vector<AntennaSubset>& cands) {
    evaluate(fitness, cands, cache, policy);
    for (std::size_t l = 0; l < l_count; ++l) {
      const double f = cache.at(cands[l]);
      if (f > nests[l].fitness) nests[l] = {cands[l], f};
    }
  };

  out.best = best_of();
  out.best_trace.push_back(out.best.fitness);
  int last_improvement = 0;
  for (int it = 1; it <= params.max_iters; ++it) {
    std::vector<AntennaSubset> cands;
    for (std::size_t l = 0; l < l_count; ++l) {
      const auto raw = levy_update(nests[l].subset.indices(), params.step_scale, params.levy_exponent, rngs[l]);
      cands.push_back(repair(raw, m, rngs[l]));
    }
    accept(cands);

    cands.clear();
    for (std::size_t l = 0; l < l_count; ++l) {
      std::uniform_int_distribution<std::size_t> pick(0, l_count - 1);
      const std::size_t j = pick(rngs[l]);
      std::size_t k = pick(rngs[l]);
      while (k == j) k = pick(rngs[l]);
      const auto raw = local_random_update(as_real(nests[l].subset), as_real(nests[j].subset),
                                           as_real(nests[k].subset), params.discard_prob, rngs[l]);
      cands.push_back(repair(raw, m, rngs[l]));
    }
    accept(cands);

    const Nest b = best_of();
    if (b.fitness > out.best.fitness) {
      out.best = b;
      last_improvement = it;
    }
    out.best_trace.push_back(out.best.fitness);
    out.iterations = it;
    if (it - last_improvement >= params.stagnation_window) break;
  }
  out.evaluations = static_cast<int>(cache.size());
  return out;
}

}  // namespace arisac
