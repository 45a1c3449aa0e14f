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
// Shared test fixtures and independent reference implementations. Nothing in
// here calls the library routine it is used to check.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "arisac/channel.hpp"
#include "arisac/metrics.hpp"
#include "arisac/ris_fp.hpp"
#include "arisac/sdp.hpp"

namespace arisac::test {

using Rng64 = std::mt19937_64;

inline Complex cn(Rng64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5) * scale);
  const double re = n(rng);
  return {re, n(rng)};
}

inline CVector random_vector(int n, Rng64& rng, double scale = 1.0) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = cn(rng, scale);
  return v;
}

inline CMatrix random_matrix(int r, int c, Rng64& rng, double scale = 1.0) {
  CMatrix m(r, c);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < r; ++i) m(i, j) = cn(rng, scale);
  }
  return m;
}

inline CMatrix random_hermitian(int n, Rng64& rng) {
  const CMatrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

inline CMatrix random_psd(int n, int rank, Rng64& rng) {
  const CMatrix a = random_matrix(n, rank, rng);
  return a * a.adjoint();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Dimensionless instance with O(1) channels, K users, Ms antennas, N
/// elements; RIS noise and user noise are O(1) as well so every identity is
/// exercised with all terms of comparable size.
struct Instance {
  SelectedChannels ch;
  TransmitBeamformer tx;
  RisState ris;
  NoiseModel noise;
  std::vector<double> mu;
};

inline Instance random_instance(int k, int ms, int n, Rng64& rng) {
  Instance in;
  in.ch.g = random_matrix(n, ms, rng);
  for (int i = 0; i < k; ++i) {
    in.ch.h_direct.push_back(random_vector(ms, rng));
    in.ch.h_ris.push_back(random_vector(n, rng));
  }
  in.tx.t = random_matrix(ms, k, rng);
  in.ris.psi = random_vector(n, rng);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  in.noise.user_noise.resize(static_cast<std::size_t>(k));
  for (auto& s : in.noise.user_noise) s = u(rng);
  in.noise.ris_noise = u(rng);
  for (int i = 0; i < k; ++i) in.mu.push_back(u(rng));
  return in;
}

// --- direct-definition oracles ---------------------------------------------

/// h_k = h_dk + G^H diag(psi) h_rk with an explicit diagonal matrix.
inline CVector oracle_effective(const CVector& hd, const CMatrix& g, const CVector& psi, const CVector& hr) {
  const CMatrix big_psi = psi.asDiagonal();
  return hd + g.adjoint() * big_psi * hr;
}

inline double oracle_sinr(int k, const CMatrix& t, const SelectedChannels& ch, const CVector& psi, double s1,
                          double sk) {
  const CVector h = oracle_effective(ch.h_direct[k], ch.g, psi, ch.h_ris[k]);
  const CMatrix big_psi = psi.asDiagonal();
  double interf = 0.0;
  for (int i = 0; i < t.cols(); ++i) {
    if (i != k) interf += std::norm(h.dot(t.col(i)));
  }
  const double ris_n = s1 * (ch.h_ris[k].adjoint() * big_psi.adjoint()).squaredNorm();
  return std::norm(h.dot(t.col(k))) / (interf + ris_n + sk);
}

// --- Gamma function (Lanczos, g = 7) ---------------------------------------

inline double lanczos_gamma(double x) {
  static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                             771.32342877765313,   -176.61502916214059,   12.507343278686905,
                             -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

// --- QCQP oracle: accelerated projected gradient in whitened coordinates ----

/// Maximizes 2 Re(psi^H v) - psi^H U psi over psi^H Pi psi <= b by FISTA on
/// phi = Pi^{1/2} psi (a ball constraint), run until the iterate stagnates.
inline CVector oracle_qcqp(const QuadraticForm& q, int max_iters = 400000) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q.pi);
  const RVector ev = es.eigenvalues();
  const CMatrix pi_half_inv = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                              es.eigenvectors().adjoint();
  const CMatrix ut = pi_half_inv * q.u * pi_half_inv;
  const CVector vt = pi_half_inv * q.v;
  Eigen::SelfAdjointEigenSolver<CMatrix> eu(0.5 * (ut + ut.adjoint()));
  const double lip = 2.0 * std::max(eu.eigenvalues().maxCoeff(), 1e-12);
  const double radius = std::sqrt(q.budget);

  auto project = [&](const CVector& x) -> CVector {
    const double nx = x.norm();
    return nx > radius ? CVector(x * (radius / nx)) : x;
  };
  CVector x = CVector::Zero(q.v.size());
  CVector y = x;
  double tk = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const CVector grad = 2.0 * (vt - ut * y);
    const CVector xn = project(y + grad / lip);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    const CVector yn = xn + ((tk - 1.0) / tn) * (xn - x);
    const double step = (xn - x).norm();
    // Restart the momentum when it points against the gradient.
    const bool restart = grad.dot(xn - x).real() < 0.0;
    x = xn;
    y = restart ? xn : yn;
    tk = restart ? 1.0 : tn;
    if (step <= 1e-15 * std::max(1.0, x.norm()) && it > 100) break;
  }
  return pi_half_inv * x;
}

// --- SDP oracle: primal log-barrier method with Newton steps ----------------

/// Interior-point reference for BlockSdp. Each Hermitian block is written in
/// real coordinates (n diagonal + n(n-1) off-diagonal reals); equalities are
/// handled in the Newton KKT system, inequalities and the cones by the
/// barrier. Needs a strictly feasible starting point.
class BarrierSdp {
public:
  explicit BarrierSdp(const BlockSdp& p) : p_(p), n_(p.dim), per_(p.dim * p.dim) {
    nvar_ = p.blocks * per_;
    for (int a = 0; a < n_; ++a) {
      for (int b = a; b < n_; ++b) {
        if (a == b) {
          basis_.push_back({a, b, false});
        } else {
          basis_.push_back({a, b, false});
          basis_.push_back({a, b, true});
        }
      }
    }
    // Equalities: diag(sum_k W_k) = d, corner(W_k) = c_k.
    std::vector<RVector> rows;
    std::vector<double> rhs;
    for (int i = 0; i < p.diag_rhs.size(); ++i) {
      RVector r = RVector::Zero(nvar_);
      for (int k = 0; k < p.blocks; ++k) r(k * per_ + index_of(i, i, false)) = 1.0;
      rows.push_back(r);
      rhs.push_back(p.diag_rhs(i));
    }
    for (std::size_t k = 0; k < p.corner_rhs.size(); ++k) {
      RVector r = RVector::Zero(nvar_);
      r(static_cast<int>(k) * per_ + index_of(n_ - 1, n_ - 1, false)) = 1.0;
      rows.push_back(r);
      rhs.push_back(p.corner_rhs[k]);
    }
    a_.resize(static_cast<int>(rows.size()), nvar_);
    b_.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      a_.row(static_cast<int>(i)) = rows[i].transpose();
      b_(static_cast<int>(i)) = rhs[i];
    }
    c_ = RVector::Zero(nvar_);
    for (int k = 0; k < p.blocks; ++k) c_.segment(k * per_, per_) = coords_of_linear(p.objective[k]);
    for (const auto& ineq : p.inequalities) {
      RVector g(nvar_);
      const RVector one = coords_of_linear(ineq.matrix);
      for (int k = 0; k < p.blocks; ++k) g.segment(k * per_, per_) = one;
      g_.push_back(g);
      h_.push_back(ineq.rhs);
    }
  }

  /// Returns the optimal value; `w0` must be strictly feasible.
  double solve(const std::vector<CMatrix>& w0, std::vector<CMatrix>* w_out = nullptr) const {
    RVector x(nvar_);
    for (int k = 0; k < p_.blocks; ++k) x.segment(k * per_, per_) = coords_of(w0[static_cast<std::size_t>(k)]);
    const double m_barrier = p_.blocks * n_ + static_cast<double>(g_.size());
    double t = 1.0;
    // Equalities are eliminated: x stays on x0 + span(null(A)) exactly, so
    // Newton runs unconstrained in the null-space coordinates.
    Eigen::JacobiSVD<RMatrix> svd(a_, Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    const RMatrix null = svd.matrixV().rightCols(nvar_ - static_cast<int>(svd.rank()));
    while (m_barrier / t > 1e-11) {
      for (int it = 0; it < 200; ++it) {
        RVector grad;
        RMatrix hess;
        derivatives(x, t, grad, hess);
        const RVector gz = null.transpose() * grad;
        const RMatrix hz = null.transpose() * hess * null;
        const RVector dx = null * hz.ldlt().solve(-gz);
        const double decrement = -grad.dot(dx);
        if (decrement / 2.0 <= 1e-13) break;
        double s = 1.0;
        const double f0 = value(x, t);
        while (s > 1e-20) {
          const RVector xn = x + s * dx;
          const double fn = value(xn, t);
          if (std::isfinite(fn) && fn <= f0 - 0.25 * s * decrement) break;
          s *= 0.5;
        }
        x += s * dx;
      }
      t *= 8.0;
    }
    if (w_out != nullptr) {
      w_out->clear();
      for (int k = 0; k < p_.blocks; ++k) w_out->push_back(matrix_of(x.segment(k * per_, per_)));
    }
    return c_.dot(x);
  }

private:
  struct Coord {
    int a, b;
    bool imag;
  };

  int index_of(int a, int b, bool imag) const {
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i].a == a && basis_[i].b == b && basis_[i].imag == imag) return static_cast<int>(i);
    }
    return -1;
  }

  CMatrix basis_matrix(const Coord& c) const {
    CMatrix e = CMatrix::Zero(n_, n_);
    if (c.a == c.b) {
      e(c.a, c.a) = 1.0;
    } else if (!c.imag) {
      e(c.a, c.b) = 1.0;
      e(c.b, c.a) = 1.0;
    } else {
      e(c.a, c.b) = Complex(0.0, 1.0);
      e(c.b, c.a) = Complex(0.0, -1.0);
    }
    return e;
  }

  // W = sum_j x_j E_j, so x_j = W_aa, Re W_ab or Im W_ab.
  RVector coords_of(const CMatrix& w) const {
    RVector x(per_);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const auto& c = basis_[i];
      x(static_cast<int>(i)) = c.imag ? w(c.a, c.b).imag() : w(c.a, c.b).real();
    }
    return x;
  }

  // tr(Q W) = sum_j x_j tr(Q E_j)
  RVector coords_of_linear(const CMatrix& q) const {
    RVector x(per_);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      x(static_cast<int>(i)) = (q * basis_matrix(basis_[i])).trace().real();
    }
    return x;
  }

  CMatrix matrix_of(const RVector& x) const {
    CMatrix w = CMatrix::Zero(n_, n_);
    for (std::size_t i = 0; i < basis_.size(); ++i) w += x(static_cast<int>(i)) * basis_matrix(basis_[i]);
    return w;
  }

  double value(const RVector& x, double t) const {
    double f = t * c_.dot(x);
    for (int k = 0; k < p_.blocks; ++k) {
      const CMatrix w = matrix_of(x.segment(k * per_, per_));
      Eigen::LLT<CMatrix> llt(w);
      if (llt.info() != Eigen::Success) return INFINITY;
      const CMatrix l = llt.matrixL();
      for (int i = 0; i < n_; ++i) {
        const double d = l(i, i).real();
        if (!(d > 0.0)) return INFINITY;
        f -= 2.0 * std::log(d);
      }
    }
    for (std::size_t i = 0; i < g_.size(); ++i) {
      const double s = h_[i] - g_[i].dot(x);
      if (!(s > 0.0)) return INFINITY;
      f -= std::log(s);
    }
    return f;
  }

  void derivatives(const RVector& x, double t, RVector& grad, RMatrix& hess) const {
    grad = t * c_;
    hess = RMatrix::Zero(nvar_, nvar_);
    std::vector<CMatrix> e;
    for (const auto& c : basis_) e.push_back(basis_matrix(c));
    for (int k = 0; k < p_.blocks; ++k) {
      const CMatrix w = matrix_of(x.segment(k * per_, per_));
      const CMatrix wi = w.inverse();
      std::vector<CMatrix> we;
      for (const auto& ej : e) we.push_back(wi * ej);
      for (int i = 0; i < per_; ++i) {
        grad(k * per_ + i) -= we[static_cast<std::size_t>(i)].trace().real();
        for (int j = 0; j < per_; ++j) {
          hess(k * per_ + i, k * per_ + j) +=
              (we[static_cast<std::size_t>(i)] * we[static_cast<std::size_t>(j)]).trace().real();
        }
      }
    }
    for (std::size_t i = 0; i < g_.size(); ++i) {
      const double s = h_[i] - g_[i].dot(x);
      grad += g_[i] / s;
      hess += g_[i] * g_[i].transpose() / (s * s);
    }
  }

  const BlockSdp& p_;
  int n_;
  int per_;
  int nvar_ = 0;
  std::vector<Coord> basis_;
  RMatrix a_;
  RVector b_;
  RVector c_;
  std::vector<RVector> g_;
  std::vector<double> h_;
};

/// Random instance with the same structure as the transmit relaxation:
/// diagonal and corner equalities, PSD shared inequalities, indefinite
/// objective. Returns the strictly feasible point used to build it.
inline BlockSdp random_structured_sdp(int blocks, int n, int num_ineq, Rng64& rng, std::vector<CMatrix>& w0) {
  BlockSdp p;
  p.blocks = blocks;
  p.dim = n;
  w0.clear();
  CMatrix sum = CMatrix::Zero(n, n);
  for (int k = 0; k < blocks; ++k) {
    CMatrix w = random_psd(n, n, rng) + 0.5 * CMatrix::Identity(n, n);
    w /= w(n - 1, n - 1).real();  // corner entry 1
    w0.push_back(w);
    sum += w;
    p.objective.push_back(random_hermitian(n, rng));
    p.corner_rhs.push_back(1.0);
  }
  p.diag_rhs = sum.diagonal().real();
  std::uniform_real_distribution<double> margin(0.05, 0.6);
  for (int i = 0; i < num_ineq; ++i) {
    CMatrix z = CMatrix::Zero(n, n);
    z.topLeftCorner(n - 1, n - 1) = random_psd(n - 1, std::max(1, n - 2), rng);
    const double used = (z * sum).trace().real();
    p.inequalities.push_back({z, used * (1.0 + margin(rng))});  // w0 keeps a strict margin
  }
  return p;
}

// --- FP oracles ------------------------------------------------------------

// Quadratic-transform objective written out with an explicit Psi matrix.
inline double oracle_h(const Instance& in, const CVector& psi, const std::vector<Complex>& eps,
                const std::vector<double>& alpha) {
  const CMatrix big = psi.asDiagonal();
  double total = 0.0;
  for (int k = 0; k < static_cast<int>(in.mu.size()); ++k) {
    const CVector h = in.ch.h_direct[k] + in.ch.g.adjoint() * big * in.ch.h_ris[k];
    double recv = in.noise.user(k) + in.noise.ris_noise * (in.ch.h_ris[k].adjoint() * big.adjoint()).squaredNorm();
    for (int i = 0; i < in.tx.t.cols(); ++i) recv += std::norm(h.dot(in.tx.t.col(i)));
    total += 2.0 * std::sqrt(in.mu[k] * (1.0 + alpha[k])) * (std::conj(eps[k]) * h.dot(in.tx.t.col(k))).real() -
             std::norm(eps[k]) * recv;
  }
  return total;
}

inline QuadraticForm random_qcqp(int n, Rng64& rng, bool singular_u) {
  QuadraticForm q;
  q.v = random_vector(n, rng);
  q.u = random_psd(n, singular_u ? std::max(1, n / 2) : n, rng);
  q.pi = random_psd(n, n, rng) + 0.1 * CMatrix::Identity(n, n);
  std::uniform_real_distribution<double> b(0.05, 3.0);
  q.budget = b(rng);
  return q;
}

}  // namespace arisac::test
