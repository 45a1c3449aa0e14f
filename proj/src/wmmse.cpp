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

#include "arisac/wmmse.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace arisac {

namespace {

void check_sizes(const TransmitBeamformer& tx, std::span<const CVector> h_eff, std::span<const CVector> h_ris) {
  if (h_eff.size() != static_cast<std::size_t>(tx.num_users()) || h_ris.size() != h_eff.size()) {
    throw std::invalid_argument("wmmse: one channel per beamformer column");
  }
}

}  // namespace

std::vector<Complex> mmse_receivers(const TransmitBeamformer& tx, std::span<const CVector> h_eff,
                                    std::span<const CVector> h_ris, const RisState& ris, const NoiseModel& noise) {
  check_sizes(tx, h_eff, h_ris);
  std::vector<Complex> s(h_eff.size());
  for (int k = 0; k < tx.num_users(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const LinkTerms lt = link_terms(k, tx, h_eff[ku], h_ris[ku], ris, noise);
    s[ku] = std::conj(lt.signal) / lt.received;
  }
  return s;
}

std::vector<double> mmse_errors(const TransmitBeamformer& tx, std::span<const CVector> h_eff,
                                std::span<const CVector> h_ris, const RisState& ris, const NoiseModel& noise) {
  check_sizes(tx, h_eff, h_ris);
  std::vector<double> e(h_eff.size());
  for (int k = 0; k < tx.num_users(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const LinkTerms lt = link_terms(k, tx, h_eff[ku], h_ris[ku], ris, noise);
    // 1 - |sig|^2 / D written as (D - |sig|^2) / D to keep it positive.
    e[ku] = lt.interference_plus_noise() / lt.received;
  }
  return e;
}

std::vector<double> wmmse_weights(std::span<const double> mu, std::span<const double> errors) {
  if (mu.size() != errors.size()) throw std::invalid_argument("wmmse_weights: size mismatch");
  std::vector<double> w(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(errors[k] > 0.0)) throw std::invalid_argument("wmmse_weights: MSE must be positive");
    w[k] = mu[k] / errors[k];
  }
  return w;
}

WmmseState wmmse_state(const TransmitBeamformer& tx, std::span<const CVector> h_eff, std::span<const CVector> h_ris,
                       const RisState& ris, const NoiseModel& noise, std::span<const double> mu) {
  WmmseState st;
  st.receivers = mmse_receivers(tx, h_eff, h_ris, ris, noise);
  st.errors = mmse_errors(tx, h_eff, h_ris, ris, noise);
  st.weights = wmmse_weights(mu, st.errors);
  return st;
}

double weighted_mse(const TransmitBeamformer& tx, std::span<const CVector> h_eff, std::span<const CVector> h_ris,
                    const RisState& ris, const NoiseModel& noise, std::span<const Complex> s,
                    std::span<const double> omega) {
  check_sizes(tx, h_eff, h_ris);
  double f = 0.0;
  for (int k = 0; k < tx.num_users(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const LinkTerms lt = link_terms(k, tx, h_eff[ku], h_ris[ku], ris, noise);
    const double e = std::norm(s[ku]) * lt.received - 2.0 * (s[ku] * lt.signal).real() + 1.0;
    f += omega[ku] * e;
  }
  return f;
}

BlockSdp SdrProblem::to_block_sdp() const {
  BlockSdp p;
  p.blocks = blocks();
  p.dim = dim();
  p.objective = objective;
  p.inequalities.push_back({radar, radar_rhs});
  p.inequalities.push_back({ris, ris_rhs});
  p.diag_rhs = diag_rhs;
  p.corner_rhs.assign(static_cast<std::size_t>(p.blocks), 1.0);
  return p;
}

SdrProblem assemble_sdr(std::span<const CVector> h_eff, std::span<const Complex> s, std::span<const double> omega,
                        const CVector& steering, const PowerBudget& budget, const CMatrix& g, const RisState& ris,
                        const NoiseModel& noise, std::span<const CVector> h_ris) {
  const int k_users = static_cast<int>(h_eff.size());
  const int ms = static_cast<int>(steering.size());
  const int n = ms + 1;
  if (s.size() != h_eff.size() || omega.size() != h_eff.size() || h_ris.size() != h_eff.size()) {
    throw std::invalid_argument("assemble_sdr: one receiver and weight per user");
  }
  if (g.cols() != ms || g.rows() != ris.psi.size()) throw std::invalid_argument("assemble_sdr: dimension mismatch");

  SdrProblem p;
  p.ris_rhs = budget.ris() - ris.psi.squaredNorm() * noise.ris_noise;
  if (p.ris_rhs < 0.0) {
    std::ostringstream os;
    os << "infeasible-RIS-budget: RIS noise power " << ris.psi.squaredNorm() * noise.ris_noise
       << " W exceeds budget " << budget.ris() << " W";
    throw SolverError(os.str());
  }

  // C_{k,1} = blockdiag(|s_k|^2 h_k h_k^H, 0); C_{k,2} adds the linear
  // terms in the last row/column.
  std::vector<CMatrix> c1(static_cast<std::size_t>(k_users), CMatrix::Zero(n, n));
  std::vector<CMatrix> c2(static_cast<std::size_t>(k_users), CMatrix::Zero(n, n));
  for (int k = 0; k < k_users; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const CVector& h = h_eff[ku];
    c1[ku].topLeftCorner(ms, ms) = std::norm(s[ku]) * (h * h.adjoint());
    c2[ku] = c1[ku];
    c2[ku].topRightCorner(ms, 1) = -std::conj(s[ku]) * h;
    c2[ku].bottomLeftCorner(1, ms) = -s[ku] * h.adjoint();
    p.constant += omega[ku] *
                  (std::norm(s[ku]) * (ris_noise_at_user(h_ris[ku], ris, noise.ris_noise) + noise.user(k)) + 1.0);
  }
  for (int k = 0; k < k_users; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    CMatrix q = omega[ku] * c2[ku];
    for (int j = 0; j < k_users; ++j) {
      if (j != k) q += omega[static_cast<std::size_t>(j)] * c1[static_cast<std::size_t>(j)];
    }
    p.objective.push_back(hermitian_part(q));
  }

  const double ps = budget.dfrc();
  p.radar = CMatrix::Zero(n, n);
  p.radar.topLeftCorner(ms, ms) =
      static_cast<double>(ms) * CMatrix::Identity(ms, ms) - steering * steering.adjoint();
  p.radar_rhs = (1.0 - budget.radar_ratio) * ms * ps;

  const CMatrix psi_g = ris.psi.conjugate().asDiagonal() * g;  // Psi^H G
  p.ris = CMatrix::Zero(n, n);
  p.ris.topLeftCorner(ms, ms) = hermitian_part(psi_g.adjoint() * psi_g);

  p.diag_rhs = RVector::Constant(n, ps / ms);
  p.diag_rhs(ms) = k_users;
  return p;
}

std::vector<CMatrix> lift_beamformer(const TransmitBeamformer& tx) {
  const int ms = tx.num_selected();
  std::vector<CMatrix> w;
  for (int k = 0; k < tx.num_users(); ++k) {
    CVector t(ms + 1);
    t.head(ms) = tx.t.col(k);
    t(ms) = 1.0;
    w.push_back(t * t.adjoint());
  }
  return w;
}

FeasibilityReport check_feasibility(const TransmitBeamformer& tx, const CVector& steering, const PowerBudget& budget,
                                    const CMatrix& g, const RisState& ris, double ris_noise) {
  FeasibilityReport r;
  const double target = budget.dfrc() / tx.num_selected();
  r.antenna_error = ((tx.antenna_powers().array() - target).abs() / target).maxCoeff();
  r.radar_power = radar_power(tx, steering);
  r.radar_target = budget.radar_target();
  r.ris_power = ris_power(tx, g, ris, ris_noise);
  r.ris_budget = budget.ris();
  return r;
}

TransmitBeamformer repair_per_antenna(const CMatrix& t, double dfrc_power) {
  const auto ms = t.rows();
  const auto k = t.cols();
  const double target = dfrc_power / static_cast<double>(ms);
  TransmitBeamformer out{t};
  for (Eigen::Index m = 0; m < ms; ++m) {
    const double nrm = t.row(m).norm();
    if (nrm > 0.0 && std::isfinite(nrm)) {
      out.t.row(m) *= std::sqrt(target) / nrm;
    } else {
      out.t.row(m).setConstant(Complex(std::sqrt(target / static_cast<double>(k)), 0.0));
    }
  }
  return out;
}

TransmitBeamformer matched_beamformer(std::span<const CVector> h_eff, double dfrc_power) {
  if (h_eff.empty()) throw std::invalid_argument("matched_beamformer: no users");
  CMatrix t(h_eff[0].size(), static_cast<Eigen::Index>(h_eff.size()));
  for (std::size_t k = 0; k < h_eff.size(); ++k) t.col(static_cast<Eigen::Index>(k)) = h_eff[k];
  return repair_per_antenna(t, dfrc_power);
}

std::string to_string(RecoveryMethod m) {
  switch (m) {
    case RecoveryMethod::Eigen: return "eigen";
    case RecoveryMethod::Randomization: return "randomization";
    case RecoveryMethod::Blend: return "blend";
  }
  return "unknown";
}

namespace {

double context_wsr(const TransmitBeamformer& tx, const TransmitContext& ctx) {
  return wsr(tx, *ctx.channels, ctx.ris, ctx.noise, ctx.mu);
}

bool context_feasible(const TransmitBeamformer& tx, const TransmitContext& ctx) {
  return check_feasibility(tx, ctx.steering, ctx.budget, ctx.channels->g, ctx.ris, ctx.noise.ris_noise)
      .ok(ctx.feasibility_tol);
}

}  // namespace

Recovery recover_beamformer(const std::vector<CMatrix>& w, const TransmitContext& ctx,
                            const TransmitBeamformer* incumbent) {
  if (ctx.channels == nullptr) throw std::invalid_argument("recover_beamformer: missing channels");
  const int k_users = static_cast<int>(w.size());
  if (k_users == 0) throw std::invalid_argument("recover_beamformer: no blocks");
  const int n = static_cast<int>(w[0].rows());
  const int ms = n - 1;
  const double ps = ctx.budget.dfrc();

  std::vector<Eigen::SelfAdjointEigenSolver<CMatrix>> eig;
  eig.reserve(w.size());
  for (const auto& wk : w) {
    if (wk.rows() != n || wk.cols() != n || !wk.allFinite()) {
      throw std::invalid_argument("recover_beamformer: blocks must be finite and share one size");
    }
    eig.emplace_back(hermitian_part(wk));
  }

  // Maximum-eigenvalue approximation.
  CMatrix t_eig(ms, k_users);
  for (int k = 0; k < k_users; ++k) {
    const auto& es = eig[static_cast<std::size_t>(k)];
    const CVector v = es.eigenvectors().col(n - 1);
    const double lam = std::max(es.eigenvalues()(n - 1), 0.0);
    if (std::abs(v(ms)) > 1e-12) {
      t_eig.col(k) = v.head(ms) / v(ms);
    } else {
      t_eig.col(k) = std::sqrt(lam) * v.head(ms);
    }
  }
  Recovery best;
  best.tx = repair_per_antenna(t_eig, ps);
  if (context_feasible(best.tx, ctx)) {
    best.method = RecoveryMethod::Eigen;
    best.wsr = context_wsr(best.tx, ctx);
    best.feasible_candidates = 1;
    return best;
  }
  const TransmitBeamformer rounded = best.tx;

  // Gaussian randomization: xi_k ~ CN(0, W_k), phase-aligned so z_k is real.
  std::vector<CMatrix> roots;
  for (const auto& es : eig) {
    const RVector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    roots.push_back(es.eigenvectors() * lam.asDiagonal());
  }
  std::mt19937_64 rng(derive_seed(ctx.seed, Stream::Randomization));
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  bool found = false;
  for (int r = 0; r < ctx.randomizations; ++r) {
    CMatrix t(ms, k_users);
    for (int k = 0; k < k_users; ++k) {
      CVector z(n);
      for (int i = 0; i < n; ++i) z(i) = Complex(normal(rng), normal(rng));
      const CVector xi = roots[static_cast<std::size_t>(k)] * z;
      const Complex phase = std::abs(xi(ms)) > 0.0 ? std::conj(xi(ms)) / std::abs(xi(ms)) : Complex(1.0);
      t.col(k) = xi.head(ms) * phase;
    }
    const TransmitBeamformer cand = repair_per_antenna(t, ps);
    if (!context_feasible(cand, ctx)) continue;
    const double f = context_wsr(cand, ctx);
    ++best.feasible_candidates;
    if (!found || f > best.wsr) {
      best.tx = cand;
      best.wsr = f;
      best.method = RecoveryMethod::Randomization;
      found = true;
    }
  }
  if (found) return best;

  if (incumbent != nullptr && context_feasible(*incumbent, ctx)) {
    // Shortest feasible step from the incumbent toward the rounded point.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto cand = repair_per_antenna((1.0 - mid) * rounded.t + mid * incumbent->t, ps);
      if (context_feasible(cand, ctx)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    best.tx = hi < 1.0 ? repair_per_antenna((1.0 - hi) * rounded.t + hi * incumbent->t, ps) : *incumbent;
    best.wsr = context_wsr(best.tx, ctx);
    best.method = RecoveryMethod::Blend;
    best.feasible_candidates = 1;
    return best;
  }

  const auto rep =
      check_feasibility(rounded, ctx.steering, ctx.budget, ctx.channels->g, ctx.ris, ctx.noise.ris_noise);
  std::ostringstream os;
  os << "rank-one-recovery-failure: no feasible candidate among eigen + " << ctx.randomizations
     << " randomizations (eigen point: radar " << rep.radar_power << " / " << rep.radar_target << " W, RIS "
     << rep.ris_power << " / " << rep.ris_budget << " W)";
  throw SolverError(os.str());
}

TransmitUpdate update_transmit_beamformer(const TransmitBeamformer& current, const TransmitContext& ctx,
                                          const SdpSettings& settings) {
  if (ctx.channels == nullptr) throw std::invalid_argument("update_transmit_beamformer: missing channels");
  const SelectedChannels& ch = *ctx.channels;
  const auto h = effective_channels(ch, ctx.ris);
  const WmmseState st = wmmse_state(current, h, ch.h_ris, ctx.ris, ctx.noise, ctx.mu);
  const SdrProblem sdr =
      assemble_sdr(h, st.receivers, st.weights, ctx.steering, ctx.budget, ch.g, ctx.ris, ctx.noise, ch.h_ris);

  TransmitUpdate out;
  out.wsr_before = context_wsr(current, ctx);
  const bool current_ok = context_feasible(current, ctx);

  const SdpSolution sol = solve_block_sdp(sdr.to_block_sdp(), settings, lift_beamformer(current));
  out.sdp_iterations = sol.iterations;
  out.sdp_status = sol.status;
  out.sdp_residuals = sol.residuals;
  if (sol.status == SdpStatus::Infeasible) throw SolverError("transmit SDR reported an infeasible affine set");

  const Recovery rec = recover_beamformer(sol.w, ctx, current_ok ? &current : nullptr);
  out.method = rec.method;
  if (current_ok && rec.wsr < out.wsr_before) {
    out.tx = current;
    out.wsr_after = out.wsr_before;
    out.kept_previous = true;
  } else {
    out.tx = rec.tx;
    out.wsr_after = rec.wsr;
  }
  return out;
}

}  // namespace arisac
