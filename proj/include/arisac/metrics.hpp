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

#include <span>
#include <vector>

#include "arisac/channel.hpp"
#include "arisac/common.hpp"

namespace arisac {

/// Total power P split between the DFRC (rho P) and the active RIS
/// ((1 - rho) P); eta is the sensing share of the DFRC power.
struct PowerBudget {
  double total_w = dbm_to_watts(20.0);
  double split_ratio = 0.9;
  double radar_ratio = 0.75;

  double dfrc() const { return split_ratio * total_w; }
  double ris() const { return (1.0 - split_ratio) * total_w; }
  double radar_target() const { return radar_ratio * dfrc(); }
  void validate() const;
};

struct NoiseModel {
  std::vector<double> user_noise;  // sigma_k^2 [W], one per user
  double ris_noise = dbm_to_watts(-40.0);

  static NoiseModel shared(int num_users, double user_noise_w, double ris_noise_w);
  double user(int k) const { return user_noise[static_cast<std::size_t>(k)]; }
  void validate(int num_users) const;
};

/// Diagonal of Psi = A Theta.
struct RisState {
  CVector psi;

  static RisState off(int num_elements) { return {CVector::Zero(num_elements)}; }
  int size() const { return static_cast<int>(psi.size()); }
};

/// Ms x K precoder; column k serves user k.
struct TransmitBeamformer {
  CMatrix t;

  int num_selected() const { return static_cast<int>(t.rows()); }
  int num_users() const { return static_cast<int>(t.cols()); }
  /// Row squared norms, i.e. diag(T T^H).
  RVector antenna_powers() const { return t.rowwise().squaredNorm(); }
};

/// Terms shared by the SINR, MMSE and quadratic-transform expressions for
/// one user: signal = h_k^H t_k and the full received power
/// sum_i |h_k^H t_i|^2 + sigma_1^2 ||h_rk^H Psi^H||^2 + sigma_k^2.
struct LinkTerms {
  Complex signal;
  double received = 0.0;
  double interference_plus_noise() const { return received - std::norm(signal); }
};

CVector effective_channel(const CVector& h_direct, const CMatrix& g, const RisState& ris, const CVector& h_ris);
std::vector<CVector> effective_channels(const SelectedChannels& ch, const RisState& ris);

/// sigma_1^2 ||h_rk^H Psi^H||^2
double ris_noise_at_user(const CVector& h_ris, const RisState& ris, double ris_noise);

LinkTerms link_terms(int k, const TransmitBeamformer& tx, const CVector& h_eff, const CVector& h_ris,
                     const RisState& ris, const NoiseModel& noise);

double sinr(int k, const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
            const NoiseModel& noise);
std::vector<double> sinrs(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                          const NoiseModel& noise);

/// Weighted sum-rate in bits/s/Hz.
double wsr(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris, const NoiseModel& noise,
           std::span<const double> weights);
double wsr_from_sinr(std::span<const double> sinr_values, std::span<const double> weights);

/// a^H T T^H a / Ms
double radar_power(const TransmitBeamformer& tx, const CVector& steering);

/// sum_k ||Psi^H G t_k||^2 + ||psi||^2 sigma_1^2
double ris_power(const TransmitBeamformer& tx, const CMatrix& g, const RisState& ris, double ris_noise);

/// Probing power over an angle grid (radians).
std::vector<double> beampattern(const TransmitBeamformer& tx, const AntennaSubset& subset,
                                std::span<const double> angles, double d_over_lambda,
                                ExecPolicy policy = ExecPolicy::Parallel);

std::vector<double> uniform_weights(int num_users);

}  // namespace arisac
