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
#include "arisac/metrics.hpp"

namespace arisac {

// Active-RIS update with the precoder held fixed. The log-sum objective is
// detached with the Lagrangian dual transform (alpha), the ratios are
// decoupled with the quadratic transform (epsilon), and the remaining
// concave quadratic in psi is maximized over the RIS power ellipsoid.

struct FpState {
  std::vector<double> alpha;
  std::vector<Complex> epsilon;
};

/// Maximize 2 Re(psi^H v) - psi^H U psi  s.t.  psi^H Pi psi <= budget.
struct QuadraticForm {
  CVector v;
  CMatrix u;
  CMatrix pi;
  double budget = 0.0;

  double objective(const CVector& psi) const;
  double constraint(const CVector& psi) const;
};

struct QcqpTrace {
  std::vector<double> lambda;
  std::vector<double> excess;  // psi(lambda)^H Pi psi(lambda) - budget
};

struct PolarRis {
  RVector amplitude;
  RVector phase;  // in (-pi, pi]
};

std::vector<double> update_alpha(std::span<const double> sinr_values);

std::vector<Complex> update_epsilon(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                                    const NoiseModel& noise, std::span<const double> weights,
                                    std::span<const double> alpha);

/// sum mu log2(1 + alpha) - sum mu alpha + sum mu (1 + alpha) gamma / (1 + gamma)
double dual_transform_objective(std::span<const double> alpha, std::span<const double> sinr_values,
                                std::span<const double> weights);

/// sum 2 sqrt(mu (1 + alpha)) Re{eps^* h^H t_k} - |eps|^2 (received power)
double quadratic_transform_objective(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                                     const NoiseModel& noise, std::span<const double> weights,
                                     std::span<const double> alpha, std::span<const Complex> epsilon);

QuadraticForm assemble_quadratic(const TransmitBeamformer& tx, const SelectedChannels& ch,
                                 std::span<const Complex> epsilon, std::span<const double> alpha,
                                 std::span<const double> weights, double ris_noise, double budget);

/// Multiplier search on the single quadratic constraint. Bisection stops when
/// the constraint excess on the feasible side is within tol * budget (or after
/// 200 halvings); the returned point is always feasible.
CVector solve_psi_qcqp(const QuadraticForm& q, double tol = 1e-9, QcqpTrace* trace = nullptr);

PolarRis split_psi(const CVector& psi);

/// c * direction with c >= 0 chosen so the RIS power equals the budget.
RisState scale_to_budget(const CVector& direction, const TransmitBeamformer& tx, const CMatrix& g, double ris_noise,
                         double budget);

/// One alpha -> epsilon -> psi pass for fixed T.
RisState ris_fp_pass(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                     const NoiseModel& noise, std::span<const double> weights, double ris_budget);

}  // namespace arisac
