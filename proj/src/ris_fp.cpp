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

#include "arisac/ris_fp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace arisac {

double QuadraticForm::objective(const CVector& psi) const {
  return 2.0 * psi.dot(v).real() - psi.dot(u * psi).real();
}

double QuadraticForm::constraint(const CVector& psi) const { return psi.dot(pi * psi).real(); }

std::vector<double> update_alpha(std::span<const double> sinr_values) {
  return {sinr_values.begin(), sinr_values.end()};
}

std::vector<Complex> update_epsilon(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                                    const NoiseModel& noise, std::span<const double> weights,
                                    std::span<const double> alpha) {
  const auto h = effective_channels(ch, ris);
  std::vector<Complex> eps(h.size());
  for (int k = 0; k < ch.num_users(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const LinkTerms lt = link_terms(k, tx, h[ku], ch.h_ris[ku], ris, noise);
    eps[ku] = std::sqrt(weights[ku] * (1.0 + alpha[ku])) * lt.signal / lt.received;
  }
  return eps;
}

double dual_transform_objective(std::span<const double> alpha, std::span<const double> sinr_values,
                                std::span<const double> weights) {
  double f = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double g = sinr_values[k];
    f += weights[k] * std::log2(1.0 + alpha[k]) - weights[k] * alpha[k] +
         weights[k] * (1.0 + alpha[k]) * g / (1.0 + g);
  }
  return f;
}

double quadratic_transform_objective(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                                     const NoiseModel& noise, std::span<const double> weights,
                                     std::span<const double> alpha, std::span<const Complex> epsilon) {
  const auto h = effective_channels(ch, ris);
  double g = 0.0;
  for (int k = 0; k < ch.num_users(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const LinkTerms lt = link_terms(k, tx, h[ku], ch.h_ris[ku], ris, noise);
    g += 2.0 * std::sqrt(weights[ku] * (1.0 + alpha[ku])) * (std::conj(epsilon[ku]) * lt.signal).real() -
         std::norm(epsilon[ku]) * lt.received;
  }
  return g;
}

QuadraticForm assemble_quadratic(const TransmitBeamformer& tx, const SelectedChannels& ch,
                                 std::span<const Complex> epsilon, std::span<const double> alpha,
                                 std::span<const double> weights, double ris_noise, double budget) {
  const int n = ch.num_ris_elements();
  const CMatrix gt = ch.g * tx.t;            // N x K, column k is G t_k
  const CMatrix cov = tx.t * tx.t.adjoint();  // sum_i t_i t_i^H
  const CMatrix g_cov = ch.g * cov;           // G sum_i t_i t_i^H
  const CMatrix g_cov_gh = g_cov * ch.g.adjoint();

  QuadraticForm q;
  q.v = CVector::Zero(n);
  q.u = CMatrix::Zero(n, n);
  q.budget = budget;
  for (int k = 0; k < ch.num_users(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    // D_k = diag(h_rk^H)
    const CVector d = ch.h_ris[ku].conjugate();
    const double e2 = std::norm(epsilon[ku]);
    const Complex lin = std::conj(epsilon[ku]) * std::sqrt(weights[ku] * (1.0 + alpha[ku]));
    q.v += lin * d.cwiseProduct(gt.col(k));
    q.v -= e2 * d.cwiseProduct(g_cov * ch.h_direct[ku]);
    q.u += e2 * (d.asDiagonal() * g_cov_gh * d.conjugate().asDiagonal());
    q.u += (e2 * ris_noise) * CMatrix(d.cwiseAbs2().cast<Complex>().asDiagonal());
  }
  q.u = hermitian_part(q.u);
  const RVector incident = gt.rowwise().squaredNorm();
  q.pi = CMatrix((incident.array() + ris_noise).matrix().cast<Complex>().asDiagonal());
  return q;
}

CVector solve_psi_qcqp(const QuadraticForm& q, double tol, QcqpTrace* trace) {
  const Eigen::Index n = q.v.size();
  if (!q.v.allFinite() || !q.u.allFinite() || !q.pi.allFinite() || !std::isfinite(q.budget)) {
    throw std::invalid_argument("solve_psi_qcqp: non-finite input");
  }
  if (q.u.rows() != n || q.pi.rows() != n) throw std::invalid_argument("solve_psi_qcqp: dimension mismatch");
  if (q.budget < 0.0) throw std::invalid_argument("solve_psi_qcqp: negative budget");
  if (q.v.squaredNorm() == 0.0 || q.budget == 0.0) return CVector::Zero(n);

  // Whiten the constraint: Pi = L L^H, phi = L^H psi. Then
  // psi(lambda) = L^-H Q (Lambda + lambda)^-1 Q^H L^-1 v with U~ = Q Lambda Q^H.
  Eigen::LLT<CMatrix> llt(hermitian_part(q.pi));
  if (llt.info() != Eigen::Success) throw std::invalid_argument("solve_psi_qcqp: Pi is not positive definite");
  const CMatrix l_inv_u = llt.matrixL().solve(hermitian_part(q.u));
  const CMatrix u_white = hermitian_part(llt.matrixL().solve(l_inv_u.adjoint()));
  const CVector v_white = llt.matrixL().solve(q.v);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(u_white);
  const RVector mu = es.eigenvalues().cwiseMax(0.0);
  const CVector c = es.eigenvectors().adjoint() * v_white;
  const RVector c2 = c.cwiseAbs2();

  const double mu_max = std::max(mu.maxCoeff(), 0.0);
  const double zero_cut = 1e-13 * std::max(mu_max, 1e-300);

  auto excess = [&](double lambda) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = mu(i) + lambda;
      if (den <= 0.0) return std::numeric_limits<double>::infinity();
      s += c2(i) / (den * den);
    }
    return s - q.budget;
  };
  auto psi_at = [&](double lambda) {
    CVector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = mu(i) + lambda;
      w(i) = den > 0.0 ? c(i) / den : Complex(0.0);
    }
    const CVector phi = es.eigenvectors() * w;
    return CVector(llt.matrixU().solve(phi));
  };

  // Interior optimum U psi = v when U is nonsingular on the support of v.
  bool singular_hit = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu(i) <= zero_cut && c2(i) > 0.0) singular_hit = true;
  }
  if (!singular_hit) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mu(i) > zero_cut) s += c2(i) / (mu(i) * mu(i));
    }
    if (s <= q.budget) {
      CVector w(n);
      for (Eigen::Index i = 0; i < n; ++i) w(i) = mu(i) > zero_cut ? c(i) / mu(i) : Complex(0.0);
      return llt.matrixU().solve(CVector(es.eigenvectors() * w));
    }
  }

  // excess(lambda) <= |v|^2_{Pi^-1} / lambda^2 - budget, so this bound is feasible.
  const double bound = std::sqrt(c2.sum() / q.budget);
  double hi = bound * 1e-6;
  double lo = 0.0;
  double g_hi = excess(hi);
  if (trace) {
    trace->lambda.push_back(hi);
    trace->excess.push_back(g_hi);
  }
  while (g_hi > 0.0) {
    lo = hi;
    hi *= 2.0;
    g_hi = excess(hi);
    if (trace) {
      trace->lambda.push_back(hi);
      trace->excess.push_back(g_hi);
    }
  }
  const double stop = tol * q.budget;
  for (int step = 0; step < 200 && g_hi < -stop; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = excess(mid);
    if (trace) {
      trace->lambda.push_back(mid);
      trace->excess.push_back(g_mid);
    }
    if (g_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
  }
  return psi_at(hi);
}

PolarRis split_psi(const CVector& psi) {
  PolarRis out;
  out.amplitude = psi.cwiseAbs();
  out.phase.resize(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    // std::arg gives (-pi, pi]; -0.0 imaginary parts would give -pi.
    const Complex z(psi(i).real(), psi(i).imag() == 0.0 ? 0.0 : psi(i).imag());
    out.phase(i) = (z == Complex(0.0)) ? 0.0 : std::arg(z);
  }
  return out;
}

RisState scale_to_budget(const CVector& direction, const TransmitBeamformer& tx, const CMatrix& g, double ris_noise,
                         double budget) {
  const double unit = ris_power(tx, g, RisState{direction}, ris_noise);
  if (!(unit > 0.0) || budget <= 0.0) return RisState::off(static_cast<int>(direction.size()));
  return {direction * std::sqrt(budget / unit)};
}

RisState ris_fp_pass(const TransmitBeamformer& tx, const SelectedChannels& ch, const RisState& ris,
                     const NoiseModel& noise, std::span<const double> weights, double ris_budget) {
  const auto g = sinrs(tx, ch, ris, noise);
  const auto alpha = update_alpha(g);
  const auto eps = update_epsilon(tx, ch, ris, noise, weights, alpha);
  const QuadraticForm q = assemble_quadratic(tx, ch, eps, alpha, weights, noise.ris_noise, ris_budget);
  return {solve_psi_qcqp(q)};
}

}  // namespace arisac
