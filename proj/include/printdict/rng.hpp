// Copyright 2026 The printdict Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

namespace printdict {

// Deterministic randomness for the whole framework.
//
// Every random draw flows from a single 64-bit seed through named substreams.
// A substream seed is obtained with derive(parent_seed, tag) or
// derive(parent_seed, tag, index...); tags live in printdict::stream. The
// scheme used throughout the library:
//
//   gallery:    derive(seed, kClusterCenters)            cluster directions
//               derive(seed, kUserCenter, global_user)   cluster pick + center
//               derive(seed, kImpression, global_user, impression)
//   generator:  derive(seed, kGeneratorColumns, attempt) projection columns
//   matcher:    derive(seed, kCalibration)               pair subsampling
//   search:     derive(seed, kCmaes, print_index)        per-print optimizer
//               derive(seed, kRandomGenome)              random baseline
//   experiment: derive(master_seed, kTrial, trial)       per-trial root seed
//               derive(trial_seed, kGallery | kGenerator | kCalibration, ...)
//
// The generator itself is xoshiro256++ with splitmix64 state expansion, so a
// given (seed, call sequence) yields the same bytes on every platform.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag,
                                      std::uint64_t index) {
  return derive(derive(seed, tag), index);
}

inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag,
                                      std::uint64_t index_a,
                                      std::uint64_t index_b) {
  return derive(derive(seed, tag, index_a), index_b);
}

namespace stream {
inline constexpr std::uint64_t kClusterCenters = 0x01;
inline constexpr std::uint64_t kUserCenter = 0x02;
inline constexpr std::uint64_t kImpression = 0x03;
inline constexpr std::uint64_t kGeneratorColumns = 0x04;
inline constexpr std::uint64_t kCalibration = 0x05;
inline constexpr std::uint64_t kCmaes = 0x06;
inline constexpr std::uint64_t kRandomGenome = 0x07;
inline constexpr std::uint64_t kTrial = 0x08;
inline constexpr std::uint64_t kGallery = 0x09;
inline constexpr std::uint64_t kGenerator = 0x0a;
inline constexpr std::uint64_t kStrategy = 0x0b;
inline constexpr std::uint64_t kHeldOut = 0x0c;
}  // namespace stream

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s = splitmix64(s);
      word = s;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, bound).
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t reject_below = (-bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= reject_below) return x % bound;
    }
  }

  // Standard normal via Box-Muller. Consumes exactly two words per call so
  // the stream position stays predictable.
  double gaussian() {
    const double u1 =
        static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  Eigen::VectorXd gaussian_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gaussian();
    return v;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace printdict
