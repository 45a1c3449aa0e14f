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
#include <span>
#include <vector>

#include "arisac/common.hpp"

namespace arisac {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

/// Deployment geometry. Both arrays are uniform linear arrays laid out along
/// the y axis, so angles are measured from the +x broadside direction.
struct SystemGeometry {
  Point2 bs_position{0.0, 0.0};
  Point2 ris_position{150.0, 0.0};
  Point2 user_center{150.0, 10.0};
  double user_radius = 5.0;
  int num_users = 4;
  int num_antennas = 8;
  int num_ris_elements = 36;
  double target_angle = deg_to_rad(30.0);

  void validate() const;
};

struct ChannelParams {
  double pathloss_ref_db = -30.0;
  double exponent_direct = 3.5;
  double exponent_ris = 2.2;
  double rician_factor = 10.0;
  double d_over_lambda = 0.5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Full-array channel realization.
struct ChannelSet {
  CMatrix g_full;                 // N x M, BS -> RIS
  std::vector<CVector> h_direct;  // K vectors of length M, BS -> user
  std::vector<CVector> h_ris;     // K vectors of length N, RIS -> user
  std::vector<Point2> user_positions;

  int num_antennas() const { return static_cast<int>(g_full.cols()); }
  int num_ris_elements() const { return static_cast<int>(g_full.rows()); }
  int num_users() const { return static_cast<int>(h_direct.size()); }
};

/// Ordered set of distinct, 0-based antenna indices.
class AntennaSubset {
public:
  AntennaSubset() = default;
  /// Throws ConfigError unless indices are distinct and inside [0, num_antennas).
  AntennaSubset(std::vector<int> indices, int num_antennas);

  static AntennaSubset full(int num_antennas);
  static AntennaSubset contiguous(int count, int num_antennas);

  std::span<const int> indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  int operator[](int i) const { return indices_[static_cast<std::size_t>(i)]; }
  int num_antennas() const { return num_antennas_; }

  friend bool operator==(const AntennaSubset&, const AntennaSubset&) = default;
  friend auto operator<=>(const AntennaSubset&, const AntennaSubset&) = default;

private:
  std::vector<int> indices_;
  int num_antennas_ = 0;
};

/// Channels restricted to a selected antenna subset.
struct SelectedChannels {
  CMatrix g;                      // N x Ms
  std::vector<CVector> h_direct;  // K vectors of length Ms
  std::vector<CVector> h_ris;     // K vectors of length N

  int num_selected() const { return static_cast<int>(g.cols()); }
  int num_ris_elements() const { return static_cast<int>(g.rows()); }
  int num_users() const { return static_cast<int>(h_direct.size()); }
};

/// Path loss PL0 * dist^(-exponent) in linear scale.
double path_loss(double pathloss_ref_db, double exponent, double dist);

/// Response of a y-axis ULA toward `angle` (radians from broadside) for the
/// given element indices: exp(j 2 pi (d/lambda) m sin(angle)).
CVector array_response(double angle, std::span<const int> elements, double d_over_lambda);

ChannelSet generate_channels(const SystemGeometry& geometry, const ChannelParams& params);

CVector steering_vector(double angle, const AntennaSubset& subset, double d_over_lambda);

SelectedChannels select_subchannels(const ChannelSet& channels, const AntennaSubset& subset);

}  // namespace arisac
