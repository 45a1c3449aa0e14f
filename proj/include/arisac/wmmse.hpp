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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arisac/channel.hpp"
#include "arisac/common.hpp"
#include "arisac/metrics.hpp"
#include "arisac/sdp.hpp"

namespace arisac {

// Transmit update with the RIS held fixed. WSR maximization is traded for a
// weighted-MSE minimization (weights mu_k / e_k), the beamformers are
// homogenized as t~_k = [t_k; z_k] and lifted to W_k = t~_k t~_k^H, and the
// relaxed block SDP is rounded back to a rank-one, per-antenna-feasible T.

struct WmmseState {
  std::vector<Complex> receivers;  // s_k
  std::vector<double> errors;      // e_k
  std::vector<double> weights;     // omega_k
};

/// s_k = t_k^H h_k / (sum_i |h_k^H t_i|^2 + RIS noise + sigma_k^2)
std::vector<Complex> mmse_receivers(const TransmitBeamformer& tx, std::span<const CVector> h_eff,
                                    std::span<const CVector> h_ris, const RisState& ris, const NoiseModel& noise);

/// e_k = 1 - |h_k^H t_k|^2 / (same denominator) = 1 / (1 + gamma_k)
std::vector<double> mmse_errors(const TransmitBeamformer& tx, std::span<const CVector> h_eff,
                                std::span<const CVector> h_ris, const RisState& ris, const NoiseModel& noise);

std::vector<double> wmmse_weights(std::span<const double> mu, std::span<const double> errors);

WmmseState wmmse_state(const TransmitBeamformer& tx, std::span<const CVector> h_eff, std::span<const CVector> h_ris,
                       const RisState& ris, const NoiseModel& noise, std::span<const double> mu);

/// Weighted MSE sum_k omega_k e_k(t_k, s_k) for arbitrary receivers s.
double weighted_mse(const TransmitBeamformer& tx, std::span<const CVector> h_eff, std::span<const CVector> h_ris,
                    const RisState& ris, const NoiseModel& noise, std::span<const Complex> s,
                    std::span<const double> omega);

struct SdrProblem {
  std::vector<CMatrix> objective;  // Q_k, (Ms+1) x (Ms+1)
  CMatrix radar;                   // Z~
  CMatrix ris;                     // Y~
  double radar_rhs = 0.0;          // (1 - eta) Ms Ps
  RVector diag_rhs;                // [Ps/Ms, ..., Ps/Ms, K]
  double ris_rhs = 0.0;            // Pa - |psi|^2 sigma_1^2
  double constant = 0.0;           // sum_k omega_k (|s_k|^2 (RIS noise + sigma_k^2) + 1)

  int blocks() const { return static_cast<int>(objective.size()); }
  int dim() const { return static_cast<int>(radar.rows()); }
  BlockSdp to_block_sdp() const;
};

/// Throws SolverError("infeasible-RIS-budget") when the RIS noise alone
/// exceeds the RIS power budget.
SdrProblem assemble_sdr(std::span<const CVector> h_eff, std::span<const Complex> s, std::span<const double> omega,
                        const CVector& steering, const PowerBudget& budget, const CMatrix& g, const RisState& ris,
                        const NoiseModel& noise, std::span<const CVector> h_ris);

/// Homogenized lift t~_k t~_k^H with z_k = 1.
std::vector<CMatrix> lift_beamformer(const TransmitBeamformer& tx);

struct FeasibilityReport {
  double antenna_error = 0.0;  // max_m |row power - Ps/Ms| / (Ps/Ms)
  double radar_power = 0.0;
  double radar_target = 0.0;
  double ris_power = 0.0;
  double ris_budget = 0.0;

  bool radar_ok(double rel_tol) const { return radar_power >= radar_target * (1.0 - rel_tol); }
  bool ris_ok(double rel_tol) const { return ris_power <= ris_budget * (1.0 + rel_tol); }
  bool ok(double rel_tol) const { return antenna_error <= rel_tol && radar_ok(rel_tol) && ris_ok(rel_tol); }
};

FeasibilityReport check_feasibility(const TransmitBeamformer& tx, const CVector& steering, const PowerBudget& budget,
                                    const CMatrix& g, const RisState& ris, double ris_noise);

/// Rescale every row of T to squared norm Ps/Ms. All-zero rows are filled
/// with equal-power entries.
TransmitBeamformer repair_per_antenna(const CMatrix& t, double dfrc_power);

/// Columns proportional to the effective channels, rows rescaled to Ps/Ms.
TransmitBeamformer matched_beamformer(std::span<const CVector> h_eff, double dfrc_power);

/// Everything the transmit update needs besides the SDR blocks.
struct TransmitContext {
  const SelectedChannels* channels = nullptr;
  RisState ris;
  NoiseModel noise;
  std::vector<double> mu;
  CVector steering;
  PowerBudget budget;
  std::uint64_t seed = 0;
  int randomizations = 100;
  double feasibility_tol = 1e-9;
};

enum class RecoveryMethod { Eigen, Randomization, Blend };

std::string to_string(RecoveryMethod m);

struct Recovery {
  TransmitBeamformer tx;
  RecoveryMethod method = RecoveryMethod::Eigen;
  double wsr = 0.0;
  int feasible_candidates = 0;
};

/// Principal-eigenvector rounding with per-antenna repair; Gaussian
/// randomization when the repaired point breaks the radar or RIS constraint.
/// If `incumbent` is given and nothing else is feasible, the rounded point is
/// blended toward it (the incumbent itself is feasible, so this always
/// succeeds). Throws SolverError("rank-one-recovery-failure: ...") otherwise.
Recovery recover_beamformer(const std::vector<CMatrix>& w, const TransmitContext& ctx,
                            const TransmitBeamformer* incumbent = nullptr);

struct TransmitUpdate {
  TransmitBeamformer tx;
  double wsr_before = 0.0;
  double wsr_after = 0.0;
  bool kept_previous = false;
  RecoveryMethod method = RecoveryMethod::Eigen;
  int sdp_iterations = 0;
  SdpStatus sdp_status = SdpStatus::Solved;
  SdpResiduals sdp_residuals;
};

/// One WMMSE/SDR step. The new T is accepted only if it is feasible and does
/// not lower the WSR of the current one; otherwise the current T is kept.
TransmitUpdate update_transmit_beamformer(const TransmitBeamformer& current, const TransmitContext& ctx,
                                          const SdpSettings& settings = {});

}  // namespace arisac
