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

#include "arisac/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace arisac {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void SystemGeometry::validate() const {
  if (num_users < 1) throw ConfigError("num_users must be >= 1");
  if (num_antennas < 1) throw ConfigError("num_antennas must be >= 1");
  if (num_ris_elements < 1) throw ConfigError("num_ris_elements must be >= 1");
  if (!(user_radius >= 0.0)) throw ConfigError("user_radius must be >= 0");
  if (!(std::abs(target_angle) < kPi / 2)) throw ConfigError("target_angle must lie in (-pi/2, pi/2)");
}

void ChannelParams::validate() const {
  if (!(exponent_direct >= 0.0) || !(exponent_ris >= 0.0)) throw ConfigError("path-loss exponents must be >= 0");
  if (!(rician_factor >= 0.0)) throw ConfigError("rician_factor must be >= 0");
  if (!(d_over_lambda > 0.0)) throw ConfigError("d_over_lambda must be > 0");
}

AntennaSubset::AntennaSubset(std::vector<int> indices, int num_antennas)
    : indices_(std::move(indices)), num_antennas_(num_antennas) {
  if (num_antennas_ < 1) throw ConfigError("antenna subset: num_antennas must be >= 1");
  if (static_cast<int>(indices_.size()) > num_antennas_) {
    throw ConfigError("antenna subset larger than the array");
  }
  for (int idx : indices_) {
    if (idx < 0 || idx >= num_antennas_) {
      throw ConfigError("antenna index " + std::to_string(idx) + " out of range [0, " +
                        std::to_string(num_antennas_ - 1) + "]");
    }
  }
  std::vector<int> sorted = indices_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("antenna subset contains duplicate indices");
  }
}

AntennaSubset AntennaSubset::full(int num_antennas) { return contiguous(num_antennas, num_antennas); }

AntennaSubset AntennaSubset::contiguous(int count, int num_antennas) {
  std::vector<int> idx(static_cast<std::size_t>(count));
  std::iota(idx.begin(), idx.end(), 0);
  return AntennaSubset(std::move(idx), num_antennas);
}

double path_loss(double pathloss_ref_db, double exponent, double dist) {
  return db_to_linear(pathloss_ref_db) * std::pow(dist, -exponent);
}

CVector array_response(double angle, std::span<const int> elements, double d_over_lambda) {
  CVector a(static_cast<Eigen::Index>(elements.size()));
  const double k = 2.0 * kPi * d_over_lambda * std::sin(angle);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    a(static_cast<Eigen::Index>(i)) = std::polar(1.0, k * elements[i]);
  }
  return a;
}

namespace {

// Angle of `to` as seen from `from`, measured from the +x axis.
double bearing(const Point2& from, const Point2& to) { return std::atan2(to.y - from.y, to.x - from.x); }

std::vector<int> iota_indices(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

class ComplexGaussian {
public:
  explicit ComplexGaussian(std::uint64_t seed) : rng_(seed) {}
  // CN(0, 1)
  Complex operator()() {
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
  }

private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

void require_nonzero(double dist, const char* what) {
  if (!(dist > 0.0)) throw ConfigError(std::string("zero distance between ") + what);
}

}  // namespace

ChannelSet generate_channels(const SystemGeometry& geometry, const ChannelParams& params) {
  geometry.validate();
  params.validate();

  const int k_users = geometry.num_users;
  const int m = geometry.num_antennas;
  const int n = geometry.num_ris_elements;

  ChannelSet out;
  out.user_positions.reserve(static_cast<std::size_t>(k_users));

  // Users uniform in the disc: radius ~ R sqrt(U), angle ~ U(0, 2 pi).
  std::mt19937_64 user_rng(derive_seed(params.rng_seed, Stream::Users));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < k_users; ++k) {
    const double r = geometry.user_radius * std::sqrt(unif(user_rng));
    const double th = 2.0 * kPi * unif(user_rng);
    out.user_positions.push_back({geometry.user_center.x + r * std::cos(th),
                                  geometry.user_center.y + r * std::sin(th)});
  }

  const double d_bs_ris = distance(geometry.bs_position, geometry.ris_position);
  require_nonzero(d_bs_ris, "DFRC and RIS");
  for (const auto& u : out.user_positions) {
    require_nonzero(distance(geometry.bs_position, u), "DFRC and a user");
    require_nonzero(distance(geometry.ris_position, u), "RIS and a user");
  }

  const double kappa = params.rician_factor;
  const double w_los = std::sqrt(kappa / (1.0 + kappa));
  const double w_nlos = std::sqrt(1.0 / (1.0 + kappa));
  const auto bs_elems = iota_indices(m);
  const auto ris_elems = iota_indices(n);

  ComplexGaussian cn(derive_seed(params.rng_seed, Stream::Channel));

  // BS -> RIS: Rician, LoS = a_ris(arrival) a_bs(departure)^H.
  {
    const double aod = bearing(geometry.bs_position, geometry.ris_position);
    const double aoa = bearing(geometry.ris_position, geometry.bs_position);
    const CVector a_bs = array_response(aod, bs_elems, params.d_over_lambda);
    const CVector a_ris = array_response(aoa, ris_elems, params.d_over_lambda);
    const double amp = std::sqrt(path_loss(params.pathloss_ref_db, params.exponent_ris, d_bs_ris));
    out.g_full.resize(n, m);
    for (int col = 0; col < m; ++col) {
      for (int row = 0; row < n; ++row) {
        const Complex los = a_ris(row) * std::conj(a_bs(col));
        out.g_full(row, col) = amp * (w_los * los + w_nlos * cn());
      }
    }
  }

  for (int k = 0; k < k_users; ++k) {
    const Point2& u = out.user_positions[static_cast<std::size_t>(k)];

    // BS -> user: Rayleigh. Stored so that the channel row is h_d^H.
    const double amp_d =
        std::sqrt(path_loss(params.pathloss_ref_db, params.exponent_direct, distance(geometry.bs_position, u)));
    CVector hd(m);
    for (int i = 0; i < m; ++i) hd(i) = amp_d * cn();
    out.h_direct.push_back(std::move(hd));

    // RIS -> user: Rician.
    const double amp_r =
        std::sqrt(path_loss(params.pathloss_ref_db, params.exponent_ris, distance(geometry.ris_position, u)));
    const CVector a_ris = array_response(bearing(geometry.ris_position, u), ris_elems, params.d_over_lambda);
    CVector hr(n);
    for (int i = 0; i < n; ++i) hr(i) = amp_r * (w_los * a_ris(i) + w_nlos * cn());
    out.h_ris.push_back(std::move(hr));
  }
  return out;
}

CVector steering_vector(double angle, const AntennaSubset& subset, double d_over_lambda) {
  return array_response(angle, subset.indices(), d_over_lambda);
}

SelectedChannels select_subchannels(const ChannelSet& channels, const AntennaSubset& subset) {
  const int m = channels.num_antennas();
  for (int idx : subset.indices()) {
    if (idx < 0 || idx >= m) throw ConfigError("antenna index " + std::to_string(idx) + " out of range");
  }
  SelectedChannels out;
  const int ms = subset.size();
  out.g.resize(channels.g_full.rows(), ms);
  for (int i = 0; i < ms; ++i) out.g.col(i) = channels.g_full.col(subset[i]);
  out.h_direct.reserve(channels.h_direct.size());
  for (const auto& hd : channels.h_direct) {
    CVector sel(ms);
    for (int i = 0; i < ms; ++i) sel(i) = hd(subset[i]);
    out.h_direct.push_back(std::move(sel));
  }
  out.h_ris = channels.h_ris;
  return out;
}

}  // namespace arisac
