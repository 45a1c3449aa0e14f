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

#include "arisac/metrics.hpp"

#include <cmath>
#include <string>

namespace arisac {

void PowerBudget::validate() const {
  if (!(total_w > 0.0)) throw ConfigError("total power must be > 0");
  if (!(split_ratio > 0.0 && split_ratio <= 1.0)) throw ConfigError("split ratio rho must lie in (0, 1]");
  if (!(radar_ratio >= 0.0 && radar_ratio <= 1.0)) throw ConfigError("radar ratio eta must lie in [0, 1]");
}

NoiseModel NoiseModel::shared(int num_users, double user_noise_w, double ris_noise_w) {
  NoiseModel n;
  n.user_noise.assign(static_cast<std::size_t>(num_users), user_noise_w);
  n.ris_noise = ris_noise_w;
  return n;
}

void NoiseModel::validate(int num_users) const {
  if (static_cast<int>(user_noise.size()) != num_users) throw ConfigError("noise model: one sigma_k^2 per user");
  for (double s : user_noise) {
    if (!(s > 0.0)) throw ConfigError("user noise power must be > 0");
  }
  if (!(ris_noise > 0.0)) throw ConfigError("RIS noise power must be > 0");
}

CVector effective_channel(const CVector& h_direct, const CMatrix& g, const RisState& ris, const CVector& h_ris) {
  if (g.rows() != ris.psi.size() || g.rows() != h_ris.size() || g.cols() != h_direct.size()) {
    throw std::invalid_argument("effective_channel: dimension mismatch");
  }
  // h_d + G^H Psi h_r with Psi diagonal.
  return h_direct + g.adjoint() * ris.psi.cwiseProduct(h_ris);
}

std::vector<CVector> effective_channels(const SelectedChannels& ch, const RisState& ris) {
  std::vector<CVector> out;
  out.reserve(static_cast<std::size_t>(ch.num_users()));
  for (int k = 0; k < ch.num_users(); ++k) {
    out.push_back(effective_channel(ch.h_direct[static_cast<std::size_t>(k)], ch.g, ris,
                                    ch.h_ris[static_cast<std::size_t>(k)]));
  }
  return out;
}

double ris_noise_at_user(const CVector& h_ris, const RisState& ris, double ris_noise) {
  return ris_noise * ris.psi.cwiseProduct(h_ris).squaredNorm();
}

LinkTerms link_terms(int k, const TransmitBeamformer& tx, const CVector& h_eff, const CVector& h_ris,
                     const RisState& ris, const NoiseModel& noise) {
  // Row vector h^H T: entry i is h_k^H t_i.
  const Eigen::RowVectorXcd gains = h_eff.adjoint() * tx.t;
  LinkTerms out;
  out.signal = gains(k);
  out.received = gains.squaredNorm() + ris_noise_at_user(h_ris, ris, noise.ris_noise) + noise.user(k);
  return out;
}

double sinr(int k, const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
            const NoiseModel& noise) {
  if (k < 0 || k >= ch.num_users() || tx.num_users() != ch.num_users()) {
    throw std::invalid_argument("sinr: user index or beamformer width mismatch");
  }
  const auto ku = static_cast<std::size_t>(k);
  const CVector h = effective_channel(ch.h_direct[ku], ch.g, ris, ch.h_ris[ku]);
  const LinkTerms lt = link_terms(k, tx, h, ch.h_ris[ku], ris, noise);
  return std::norm(lt.signal) / lt.interference_plus_noise();
}

std::vector<double> sinrs(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                          const NoiseModel& noise) {
  std::vector<double> out(static_cast<std::size_t>(ch.num_users()));
  for (int k = 0; k < ch.num_users(); ++k) out[static_cast<std::size_t>(k)] = sinr(k, tx, ch, ris, noise);
  return out;
}

double wsr_from_sinr(std::span<const double> sinr_values, std::span<const double> weights) {
  if (sinr_values.size() != weights.size()) throw std::invalid_argument("wsr: one weight per user");
  double r = 0.0;
  for (std::size_t k = 0; k < sinr_values.size(); ++k) r += weights[k] * std::log2(1.0 + sinr_values[k]);
  return r;
}

double wsr(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris, const NoiseModel& noise,
           std::span<const double> weights) {
  const auto g = sinrs(tx, ch, ris, noise);
  return wsr_from_sinr(g, weights);
}

double radar_power(const TransmitBeamformer& tx, const CVector& steering) {
  if (steering.size() != tx.t.rows()) throw std::invalid_argument("radar_power: steering length != Ms");
  return (steering.adjoint() * tx.t).squaredNorm() / static_cast<double>(tx.t.rows());
}

double ris_power(const TransmitBeamformer& tx, const CMatrix& g, const RisState& ris, double ris_noise) {
  if (g.rows() != ris.psi.size() || g.cols() != tx.t.rows()) {
    throw std::invalid_argument("ris_power: dimension mismatch");
  }
  // Psi^H G t_k = conj(psi) .* (G t_k), so the amplified signal power is
  // sum_n |psi_n|^2 sum_k |(G T)_{n,k}|^2.
  const RVector incident = (g * tx.t).rowwise().squaredNorm();
  const RVector amp2 = ris.psi.cwiseAbs2();
  return amp2.dot(incident) + amp2.sum() * ris_noise;
}

std::vector<double> beampattern(const TransmitBeamformer& tx, const AntennaSubset& subset,
                                std::span<const double> angles, double d_over_lambda, ExecPolicy policy) {
  const auto n = static_cast<long>(angles.size());
  std::vector<double> out(angles.size());
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          radar_power(tx, steering_vector(angles[static_cast<std::size_t>(i)], subset, d_over_lambda));
    }
  } else {
    for (long i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          radar_power(tx, steering_vector(angles[static_cast<std::size_t>(i)], subset, d_over_lambda));
    }
  }
  return out;
}

std::vector<double> uniform_weights(int num_users) {
  return std::vector<double>(static_cast<std::size_t>(num_users), 1.0 / num_users);
}

}  // namespace arisac
