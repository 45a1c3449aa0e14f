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

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace arisac {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

// Error categories. The CLI maps each one to its own exit code.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Selects between the OpenMP kernels and their serial reference loops.
enum class ExecPolicy { Serial, Parallel };

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// SplitMix64 finalizer; used to derive independent RNG substreams from a
/// base seed and a stream tag so that results do not depend on call order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream tags for derive_seed.
enum class Stream : std::uint64_t {
  Channel = 1,
  Users = 2,
  Cuckoo = 3,
  FitnessPsi = 4,
  RandomSubset = 5,
  OptimizerInit = 6,
  Randomization = 7,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream s) {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

/// Hermitian part (H + H^H) / 2.
inline CMatrix hermitian_part(const CMatrix& h) { return 0.5 * (h + h.adjoint()); }

inline bool all_finite(const CMatrix& m) { return m.allFinite(); }

}  // namespace arisac
