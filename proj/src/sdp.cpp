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

#include "arisac/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace arisac {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Solved: return "solved";
    case SdpStatus::Inaccurate: return "inaccurate";
    case SdpStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

double SdpResiduals::max_primal() const { return std::max({equality, inequality, cone}); }

void BlockSdp::validate() const {
  if (blocks < 1 || dim < 1) throw std::invalid_argument("BlockSdp: blocks and dim must be >= 1");
  auto check = [&](const CMatrix& m, const char* what) {
    if (m.rows() != dim || m.cols() != dim) throw std::invalid_argument(std::string("BlockSdp: bad shape for ") + what);
    if (!m.allFinite()) throw std::invalid_argument(std::string("BlockSdp: non-finite ") + what);
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument(std::string("BlockSdp: ") + what + " is not Hermitian");
    }
  };
  if (static_cast<int>(objective.size()) != blocks) throw std::invalid_argument("BlockSdp: one objective per block");
  for (const auto& q : objective) check(q, "objective");
  for (const auto& in : inequalities) {
    check(in.matrix, "inequality matrix");
    if (!std::isfinite(in.rhs)) throw std::invalid_argument("BlockSdp: non-finite inequality rhs");
  }
  if (diag_rhs.size() != 0 && diag_rhs.size() != dim) throw std::invalid_argument("BlockSdp: diag_rhs length != dim");
  if (!diag_rhs.allFinite()) throw std::invalid_argument("BlockSdp: non-finite diag_rhs");
  if (!corner_rhs.empty() && static_cast<int>(corner_rhs.size()) != blocks) {
    throw std::invalid_argument("BlockSdp: one corner value per block");
  }
}

double BlockSdp::objective_value(const std::vector<CMatrix>& w) const {
  double v = 0.0;
  for (int k = 0; k < blocks; ++k) v += (objective[k].cwiseProduct(w[k].transpose())).sum().real();
  return v;
}

CMatrix project_psd(const CMatrix& h) {
  if (!h.allFinite()) throw std::invalid_argument("project_psd: non-finite input");
  const CMatrix herm = hermitian_part(h);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  const RVector lam = es.eigenvalues().cwiseMax(0.0);
  const CMatrix& v = es.eigenvectors();
  CMatrix out = v * lam.asDiagonal() * v.adjoint();
  return hermitian_part(out);
}

namespace {

// Re tr(A X) for Hermitian A, X.
inline double real_inner(const CMatrix& a, const CMatrix& x) {
  return (a.array().conjugate() * x.array()).sum().real();
}

// Element of the product space (Herm(n))^K x R^m_ineq.
struct Point {
  std::vector<CMatrix> blocks;
  RVector slack;

  double dot(const Point& o) const {
    double v = slack.dot(o.slack);
    for (std::size_t k = 0; k < blocks.size(); ++k) v += real_inner(blocks[k], o.blocks[k]);
    return v;
  }
  double norm() const { return std::sqrt(dot(*this)); }
  void axpy(double a, const Point& o) {
    for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] += a * o.blocks[k];
    slack += a * o.slack;
  }
  void scale(double a) {
    for (auto& b : blocks) b *= a;
    slack *= a;
  }
};

Point zeros(int blocks, int dim, int slacks) {
  Point p;
  p.blocks.assign(static_cast<std::size_t>(blocks), CMatrix::Zero(dim, dim));
  p.slack = RVector::Zero(slacks);
  return p;
}

Point lin_comb(double a, const Point& x, double b, const Point& y) {
  Point p = x;
  p.scale(a);
  p.axpy(b, y);
  return p;
}

// One linear constraint row: sum_k Re tr(A_k X_k) + coef * s_slot = b.
struct Row {
  std::vector<CMatrix> mats;
  std::vector<bool> active;
  int slack_slot = -1;
  double slack_coef = 0.0;
};

class AdmmSolver {
public:
  AdmmSolver(const BlockSdp& p, const SdpSettings& s) : problem_(p), settings_(s) {
    k_ = p.blocks;
    n_ = p.dim;
    m_ineq_ = static_cast<int>(p.inequalities.size());
    build_scaling();
    build_rows();
    build_gram();
  }

  SdpSolution run(const std::optional<std::vector<CMatrix>>& initial) {
    SdpSolution sol;
    if (!consistent_) {
      sol.status = SdpStatus::Infeasible;
      sol.w.assign(static_cast<std::size_t>(k_), CMatrix::Zero(n_, n_));
      sol.residuals.equality = std::numeric_limits<double>::infinity();
      return sol;
    }

    Point z = zeros(k_, n_, m_ineq_);
    if (initial) {
      if (static_cast<int>(initial->size()) != k_) throw std::invalid_argument("solve_block_sdp: bad warm start");
      for (int k = 0; k < k_; ++k) z.blocks[k] = project_psd(unscale_inv((*initial)[k]));
      const RVector ax = apply(z);
      for (int i = 0; i < m_ineq_; ++i) z.slack(i) = std::max(0.0, b_(i) - ax(i));
    }
    Point u = zeros(k_, n_, m_ineq_);
    Point x = z;
    double rho = settings_.initial_penalty;
    const double alpha = settings_.over_relaxation;

    // Type-II Anderson acceleration of the fixed-point map (z, u) -> (z+, u+)
    // with a residual safeguard: an extrapolated point is kept only if the
    // next plain step shrinks the fixed-point residual.
    const int mem = settings_.anderson_memory;
    std::vector<RVector> dg, df;
    RVector g_last, f_last;
    bool have_last = false, last_was_aa = false;
    double f_norm_ref = 0.0;
    Point z_safe = z, u_safe = u;
    auto reset_aa = [&]() {
      dg.clear();
      df.clear();
      have_last = false;
      last_was_aa = false;
    };

    int it = 0;
    bool converged = false;
    for (it = 1; it <= settings_.max_iters; ++it) {
      // x-update: projection of z - u - C / rho onto the affine set.
      Point v = lin_comb(1.0, z, -1.0, u);
      v.axpy(-1.0 / rho, c_);
      x = project_affine(v);
      Point xr = lin_comb(alpha, x, 1.0 - alpha, z);

      // z-update: cone projection of xr + u; then the dual update.
      Point w = lin_comb(1.0, xr, 1.0, u);
      Point z_next = zeros(k_, n_, m_ineq_);
      for (int k = 0; k < k_; ++k) z_next.blocks[k] = project_psd(w.blocks[k]);
      z_next.slack = w.slack.cwiseMax(0.0);
      Point u_next = u;
      u_next.axpy(1.0, xr);
      u_next.axpy(-1.0, z_next);

      const double r_prim = lin_comb(1.0, x, -1.0, z_next).norm();
      const double r_dual = rho * lin_comb(1.0, z_next, -1.0, z).norm();
      if (it % settings_.check_every == 0) {
        const double scale = 1.0 + std::max(x.norm(), z_next.norm());
        if (r_prim <= settings_.tol * scale && r_dual <= settings_.tol * scale) {
          const RVector res = apply(z_next) - b_;
          if (res.cwiseAbs().maxCoeff() <= settings_.tol && kkt_ok(z_next, u_next, rho)) {
            z = std::move(z_next);
            u = std::move(u_next);
            converged = true;
            break;
          }
        }
      }

      bool rho_changed = false;
      if (it % (5 * settings_.check_every) == 0) {
        // Residual balancing on relative residuals: primal against the
        // iterate size, dual against max(|y|, |C|) with y = rho u.
        const double rel_p = r_prim / std::max({x.norm(), z_next.norm(), 1e-300});
        const double rel_d = r_dual / std::max(rho * u_next.norm(), 1.0);
        if (rel_p > 0.0 && rel_d > 0.0) {
          const double ratio = std::sqrt(rel_p / rel_d);
          if (ratio > 3.0 || ratio < 1.0 / 3.0) {
            const double next = std::clamp(rho * ratio, 1e-6, 1e6);
            u_next.scale(rho / next);
            rho = next;
            rho_changed = true;
          }
        }
      }

      if (mem <= 0 || rho_changed) {
        if (rho_changed) reset_aa();
        z = std::move(z_next);
        u = std::move(u_next);
        continue;
      }

      const RVector g = pack(z, u);
      const RVector f = pack(z_next, u_next) - g;
      const double f_norm = f.norm();
      if (last_was_aa && f_norm > f_norm_ref) {
        // Extrapolation did not pay off: fall back to the last plain step.
        reset_aa();
        z = z_safe;
        u = u_safe;
        continue;
      }
      if (have_last) {
        dg.push_back(g - g_last);
        df.push_back(f - f_last);
        if (static_cast<int>(dg.size()) > mem) {
          dg.erase(dg.begin());
          df.erase(df.begin());
        }
      }
      g_last = g;
      f_last = f;
      have_last = true;
      z_safe = z_next;
      u_safe = u_next;
      f_norm_ref = f_norm;
      if (dg.empty()) {
        last_was_aa = false;
        z = std::move(z_next);
        u = std::move(u_next);
        continue;
      }
      const auto m = static_cast<Eigen::Index>(dg.size());
      RMatrix dfm(f.size(), m), dgm(f.size(), m);
      for (Eigen::Index j = 0; j < m; ++j) {
        dfm.col(j) = df[static_cast<std::size_t>(j)];
        dgm.col(j) = dg[static_cast<std::size_t>(j)];
      }
      RMatrix gram = dfm.transpose() * dfm;
      gram.diagonal().array() += 1e-10 * (1.0 + gram.diagonal().maxCoeff());
      const RVector gamma = gram.ldlt().solve(dfm.transpose() * f);
      const RVector g_aa = g + f - (dgm + dfm) * gamma;
      if (!g_aa.allFinite()) {
        reset_aa();
        z = std::move(z_next);
        u = std::move(u_next);
        continue;
      }
      unpack(g_aa, z, u);
      last_was_aa = true;
    }
    if (!converged && last_was_aa) {
      z = z_safe;
      u = u_safe;
    }

    sol.iterations = std::min(it, settings_.max_iters);
    sol.w.resize(static_cast<std::size_t>(k_));
    for (int k = 0; k < k_; ++k) sol.w[k] = hermitian_part(unscale(z.blocks[k]));
    sol.objective = problem_.objective_value(sol.w);
    sol.residuals = residuals(sol.w, z, u, rho);
    sol.status = converged ? SdpStatus::Solved : SdpStatus::Inaccurate;
    return sol;
  }

private:
  RVector pack(const Point& z, const Point& u) const {
    const Eigen::Index nb = static_cast<Eigen::Index>(n_) * n_;
    RVector out(2 * (2 * k_ * nb + m_ineq_));
    Eigen::Index o = 0;
    for (const Point* p : {&z, &u}) {
      for (const auto& b : p->blocks) {
        out.segment(o, nb) = b.real().reshaped();
        out.segment(o + nb, nb) = b.imag().reshaped();
        o += 2 * nb;
      }
      out.segment(o, m_ineq_) = p->slack;
      o += m_ineq_;
    }
    return out;
  }

  void unpack(const RVector& g, Point& z, Point& u) const {
    const Eigen::Index nb = static_cast<Eigen::Index>(n_) * n_;
    Eigen::Index o = 0;
    for (Point* p : {&z, &u}) {
      for (auto& b : p->blocks) {
        b.real() = g.segment(o, nb).reshaped(n_, n_);
        b.imag() = g.segment(o + nb, nb).reshaped(n_, n_);
        o += 2 * nb;
      }
      p->slack = g.segment(o, m_ineq_);
      o += m_ineq_;
    }
  }

  // Variable scaling X = D X' D with D_jj = sqrt(d_j) so the fixed diagonal
  // of the scaled variable is all ones.
  void build_scaling() {
    dscale_ = RVector::Ones(n_);
    if (problem_.diag_rhs.size() == n_) {
      for (int j = 0; j < n_; ++j) {
        const double d = problem_.diag_rhs(j) / k_;
        if (d > 0.0) dscale_(j) = std::sqrt(d);
      }
    }
  }

  CMatrix scale_data(const CMatrix& a) const { return dscale_.asDiagonal() * a * dscale_.asDiagonal(); }
  CMatrix unscale(const CMatrix& xs) const { return dscale_.asDiagonal() * xs * dscale_.asDiagonal(); }
  CMatrix unscale_inv(const CMatrix& x) const {
    const RVector inv = dscale_.cwiseInverse();
    return inv.asDiagonal() * x * inv.asDiagonal();
  }

  void build_rows() {
    std::vector<double> rhs;
    auto empty_row = [&]() {
      Row r;
      r.mats.assign(static_cast<std::size_t>(k_), CMatrix::Zero(n_, n_));
      r.active.assign(static_cast<std::size_t>(k_), false);
      return r;
    };
    for (int i = 0; i < m_ineq_; ++i) {
      Row r = empty_row();
      const CMatrix a = scale_data(hermitian_part(problem_.inequalities[i].matrix));
      for (int k = 0; k < k_; ++k) {
        r.mats[k] = a;
        r.active[k] = true;
      }
      r.slack_slot = i;
      // Slack in the same units as the matrix part, so that badly scaled
      // inequalities do not degenerate into "slack = rhs".
      const double a_norm = std::sqrt(static_cast<double>(k_)) * a.norm();
      r.slack_coef = a_norm > 0.0 ? a_norm : 1.0;
      rows_.push_back(std::move(r));
      rhs.push_back(problem_.inequalities[i].rhs);
    }
    eq_begin_ = static_cast<int>(rows_.size());
    if (problem_.diag_rhs.size() == n_) {
      for (int j = 0; j < n_; ++j) {
        Row r = empty_row();
        for (int k = 0; k < k_; ++k) {
          r.mats[k](j, j) = dscale_(j) * dscale_(j);
          r.active[k] = true;
        }
        rows_.push_back(std::move(r));
        rhs.push_back(problem_.diag_rhs(j));
      }
    }
    if (!problem_.corner_rhs.empty()) {
      for (int k = 0; k < k_; ++k) {
        Row r = empty_row();
        r.mats[k](n_ - 1, n_ - 1) = dscale_(n_ - 1) * dscale_(n_ - 1);
        r.active[k] = true;
        rows_.push_back(std::move(r));
        rhs.push_back(problem_.corner_rhs[k]);
      }
    }
    m_ = static_cast<int>(rows_.size());
    b_ = RVector(m_);
    for (int i = 0; i < m_; ++i) {
      Row& r = rows_[i];
      double nrm2 = r.slack_coef * r.slack_coef;
      for (int k = 0; k < k_; ++k) {
        if (r.active[k]) nrm2 += r.mats[k].squaredNorm();
      }
      const double nrm = std::sqrt(nrm2);
      const double inv = nrm > 0.0 ? 1.0 / nrm : 1.0;
      for (int k = 0; k < k_; ++k) {
        if (r.active[k]) r.mats[k] *= inv;
      }
      r.slack_coef *= inv;
      b_(i) = rhs[i] * inv;
      row_norm_.push_back(nrm);
    }

    c_ = zeros(k_, n_, m_ineq_);
    for (int k = 0; k < k_; ++k) c_.blocks[k] = scale_data(hermitian_part(problem_.objective[k]));
    obj_scale_ = c_.norm();
    if (obj_scale_ > 0.0) c_.scale(1.0 / obj_scale_);
  }

  RVector apply(const Point& x) const {
    RVector out(m_);
    for (int i = 0; i < m_; ++i) {
      const Row& r = rows_[i];
      double v = 0.0;
      for (int k = 0; k < k_; ++k) {
        if (r.active[k]) v += real_inner(r.mats[k], x.blocks[k]);
      }
      if (r.slack_slot >= 0) v += r.slack_coef * x.slack(r.slack_slot);
      out(i) = v;
    }
    return out;
  }

  Point adjoint(const RVector& y) const {
    Point p = zeros(k_, n_, m_ineq_);
    for (int i = 0; i < m_; ++i) {
      const Row& r = rows_[i];
      if (y(i) == 0.0) continue;
      for (int k = 0; k < k_; ++k) {
        if (r.active[k]) p.blocks[k] += y(i) * r.mats[k];
      }
      if (r.slack_slot >= 0) p.slack(r.slack_slot) += y(i) * r.slack_coef;
    }
    return p;
  }

  void build_gram() {
    RMatrix g = RMatrix::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      for (int j = i; j < m_; ++j) {
        double v = 0.0;
        for (int k = 0; k < k_; ++k) {
          if (rows_[i].active[k] && rows_[j].active[k]) v += real_inner(rows_[i].mats[k], rows_[j].mats[k]);
        }
        if (rows_[i].slack_slot >= 0 && rows_[i].slack_slot == rows_[j].slack_slot) {
          v += rows_[i].slack_coef * rows_[j].slack_coef;
        }
        g(i, j) = v;
        g(j, i) = v;
      }
    }
    // Pseudo-inverse tolerates redundant rows (e.g. the last diagonal entry
    // is implied by the corner equalities).
    Eigen::SelfAdjointEigenSolver<RMatrix> es(g);
    const RVector lam = es.eigenvalues();
    const double cut = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    RVector inv(m_);
    for (int i = 0; i < m_; ++i) inv(i) = lam(i) > cut ? 1.0 / lam(i) : 0.0;
    gram_pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    const RVector proj_b = g * (gram_pinv_ * b_);
    consistent_ = (proj_b - b_).norm() <= 1e-9 * (1.0 + b_.norm());
  }

  Point project_affine(const Point& v) const {
    const RVector r = apply(v) - b_;
    Point out = v;
    out.axpy(-1.0, adjoint(gram_pinv_ * r));
    return out;
  }

  // The cheap ADMM residuals can pass while the unscaled KKT conditions are
  // still slightly off, so convergence also requires the full certificate.
  bool kkt_ok(const Point& z, const Point& u, double rho) const {
    std::vector<CMatrix> w(static_cast<std::size_t>(k_));
    for (int k = 0; k < k_; ++k) w[k] = hermitian_part(unscale(z.blocks[k]));
    const SdpResiduals r = residuals(w, z, u, rho);
    return std::max({r.equality, r.inequality, r.cone, r.stationarity, r.gap}) <= settings_.kkt_tol;
  }

  SdpResiduals residuals(const std::vector<CMatrix>& w, const Point& z, const Point& u, double rho) const {
    SdpResiduals res;
    if (problem_.diag_rhs.size() == n_) {
      RVector diag = RVector::Zero(n_);
      for (const auto& wk : w) diag += wk.diagonal().real();
      res.equality = (diag - problem_.diag_rhs).cwiseAbs().maxCoeff();
    }
    for (int k = 0; k < static_cast<int>(problem_.corner_rhs.size()); ++k) {
      res.equality = std::max(res.equality, std::abs(w[k](n_ - 1, n_ - 1).real() - problem_.corner_rhs[k]));
    }
    for (const auto& in : problem_.inequalities) {
      double lhs = 0.0;
      for (const auto& wk : w) lhs += real_inner(in.matrix, wk);
      res.inequality = std::max(res.inequality, lhs - in.rhs);
    }
    for (const auto& wk : w) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(wk, Eigen::EigenvaluesOnly);
      res.cone = std::max(res.cone, -es.eigenvalues().minCoeff());
    }

    // Dual certificate in normalized units: S = -rho u is in the dual cone by
    // construction; y fits C + A^* y = S in least squares.
    Point s = u;
    s.scale(-rho);
    const RVector y = gram_pinv_ * apply(lin_comb(1.0, s, -1.0, c_));
    Point stat = c_;
    stat.axpy(1.0, adjoint(y));
    stat.axpy(-1.0, s);
    res.stationarity = stat.norm();
    const double primal = c_.dot(z);
    const double dual = -b_.dot(y);
    res.gap = std::abs(primal - dual) / (1.0 + std::abs(primal));
    return res;
  }

  const BlockSdp& problem_;
  SdpSettings settings_;
  int k_ = 0, n_ = 0, m_ = 0, m_ineq_ = 0, eq_begin_ = 0;
  RVector dscale_;
  std::vector<Row> rows_;
  std::vector<double> row_norm_;
  RVector b_;
  Point c_;
  double obj_scale_ = 1.0;
  RMatrix gram_pinv_;
  bool consistent_ = true;
};

}  // namespace

SdpSolution solve_block_sdp(const BlockSdp& problem, const SdpSettings& settings,
                            const std::optional<std::vector<CMatrix>>& initial) {
  problem.validate();
  if (!(settings.tol > 0.0)) throw std::invalid_argument("solve_block_sdp: tol must be > 0");
  if (!(settings.kkt_tol > 0.0)) throw std::invalid_argument("solve_block_sdp: kkt_tol must be > 0");
  if (settings.max_iters < 1 || settings.check_every < 1) throw std::invalid_argument("solve_block_sdp: bad settings");
  AdmmSolver solver(problem, settings);
  return solver.run(initial);
}

}  // namespace arisac
