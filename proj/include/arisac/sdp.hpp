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

#include <optional>
#include <string>
#include <vector>

#include "arisac/common.hpp"

namespace arisac {

/// sum_k Re tr(matrix * W_k) <= rhs, with the same Hermitian matrix for every block.
struct SharedInequality {
  CMatrix matrix;
  double rhs = 0.0;
};

/// Block Hermitian SDP
///
///   minimize    sum_k tr(Q_k W_k)
///   subject to  sum_k tr(Z_i W_k) <= b_i          (shared inequalities)
///               diag(sum_k W_k) = d               (if diag_rhs is non-empty)
///               [W_k]_{n-1,n-1} = c_k             (if corner_rhs is non-empty)
///               W_k Hermitian PSD, k = 0..K-1
struct BlockSdp {
  int blocks = 0;
  int dim = 0;
  std::vector<CMatrix> objective;
  std::vector<SharedInequality> inequalities;
  RVector diag_rhs;
  std::vector<double> corner_rhs;

  /// Throws std::invalid_argument on malformed problems.
  void validate() const;
  double objective_value(const std::vector<CMatrix>& w) const;
};

enum class SdpStatus { Solved, Inaccurate, Infeasible };

std::string to_string(SdpStatus s);

struct SdpSettings {
  double tol = 1e-7;
  double kkt_tol = 1e-6;  // bound on every SdpResiduals entry at convergence
  int max_iters = 20000;
  double over_relaxation = 1.6;
  double initial_penalty = 0.01;
  int check_every = 10;
  int anderson_memory = 10;  // 0 disables acceleration
};

/// Residuals of the returned iterate. equality/inequality are in the units of
/// the problem data; stationarity and gap refer to the internally normalized
/// problem (unit-norm constraint rows and objective) and are dimensionless.
struct SdpResiduals {
  double equality = 0.0;
  double inequality = 0.0;
  double cone = 0.0;
  double stationarity = 0.0;
  double gap = 0.0;

  double max_primal() const;
};

struct SdpSolution {
  std::vector<CMatrix> w;
  double objective = 0.0;
  SdpResiduals residuals;
  int iterations = 0;
  SdpStatus status = SdpStatus::Inaccurate;
};

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped to 0).
/// The input is symmetrized first; throws std::invalid_argument on NaN/Inf.
CMatrix project_psd(const CMatrix& h);

/// ADMM operator splitting between the affine set (with nonnegative slacks for
/// the inequalities) and the product of PSD cones. `initial` warm-starts the
/// cone iterate.
SdpSolution solve_block_sdp(const BlockSdp& problem, const SdpSettings& settings = {},
                            const std::optional<std::vector<CMatrix>>& initial = std::nullopt);

}  // namespace arisac
