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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "printdict/errors.hpp"
#include "printdict/gallery.hpp"
#include "printdict/rng.hpp"

namespace printdict {

// Cosine-similarity verifier with empirical false-match-rate calibration.
// A verification attempt against a user passes if any enrolled impression
// scores at or above the calibrated threshold.

inline double score(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw UsageError("score: template dimensions do not match");
  return a.dot(b);
}

struct FmrCalibration {
  double target_fmr = 0.0;
  double threshold = 0.0;
  std::int64_t impostor_pair_count = 0;
  double achieved_fmr = 0.0;
};

// Smallest observed score t with fraction{scores >= t} <= target_fmr, i.e.
// the most permissive threshold that still honors the advertised FMR.
// Returns {threshold, achieved_fmr}. If even the top score is too frequent
// (mass ties), falls back to rejecting everything.
inline std::pair<double, double> select_threshold(std::vector<double> scores,
                                                  double target_fmr) {
  if (scores.empty()) throw UsageError("select_threshold: no scores");
  if (!(target_fmr > 0.0) || target_fmr > 1.0)
    throw ConfigError("target_fmr must lie in (0, 1]");
  std::sort(scores.begin(), scores.end());
  const auto n = static_cast<double>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i > 0 && scores[i] == scores[i - 1]) continue;
    const double fraction = (n - static_cast<double>(i)) / n;
    if (fraction <= target_fmr) return {scores[i], fraction};
  }
  return {std::nextafter(scores.back(), std::numeric_limits<double>::max()),
          0.0};
}

namespace detail {

struct TemplateRef {
  int user_index;
  const Eigen::VectorXd* impression;
};

inline std::vector<TemplateRef> flatten_impressions(const Gallery& gallery) {
  std::vector<TemplateRef> refs;
  for (int u = 0; u < gallery.user_count(); ++u)
    for (const auto& imp : gallery.users[u].impressions)
      refs.push_back({u, &imp});
  return refs;
}

inline std::int64_t cross_user_pair_count(const Gallery& gallery) {
  std::int64_t total = 0;
  for (const auto& user : gallery.users)
    total += static_cast<std::int64_t>(user.impressions.size());
  std::int64_t pairs = total * (total - 1) / 2;
  for (const auto& user : gallery.users) {
    const auto k = static_cast<std::int64_t>(user.impressions.size());
    pairs -= k * (k - 1) / 2;
  }
  return pairs;
}

}  // namespace detail

inline constexpr std::int64_t kMaxCalibrationPairs = 1000000;
inline constexpr std::int64_t kMinCalibrationPairs = 1000;

// Collects impostor scores over cross-user impression pairs (uniformly
// subsampled to kMaxCalibrationPairs when the full set is larger) and picks
// the threshold realizing the target FMR.
inline FmrCalibration calibrate(const Gallery& gallery, double target_fmr,
                                std::uint64_t seed) {
  if (!(target_fmr > 0.0) || target_fmr > 1.0)
    throw ConfigError("target_fmr must lie in (0, 1]");
  if (gallery.user_count() < 2)
    throw ConfigError("calibration needs at least 2 users");

  const auto refs = detail::flatten_impressions(gallery);
  const std::int64_t available = detail::cross_user_pair_count(gallery);
  if (available < kMinCalibrationPairs)
    throw CalibrationError(
        "calibration refused: fewer than 1000 impostor pairs available");

  std::vector<double> scores;
  if (available <= kMaxCalibrationPairs) {
    scores.reserve(static_cast<std::size_t>(available));
    for (std::size_t i = 0; i < refs.size(); ++i)
      for (std::size_t j = i + 1; j < refs.size(); ++j) {
        if (refs[i].user_index == refs[j].user_index) continue;
        scores.push_back(refs[i].impression->dot(*refs[j].impression));
      }
  } else {
    Rng rng(derive(seed, stream::kCalibration));
    scores.reserve(static_cast<std::size_t>(kMaxCalibrationPairs));
    const auto count = static_cast<std::uint64_t>(refs.size());
    while (scores.size() < static_cast<std::size_t>(kMaxCalibrationPairs)) {
      const auto i = rng.uniform_below(count);
      const auto j = rng.uniform_below(count);
      if (refs[i].user_index == refs[j].user_index) continue;
      scores.push_back(refs[i].impression->dot(*refs[j].impression));
    }
  }

  const auto [threshold, achieved] = select_threshold(scores, target_fmr);
  FmrCalibration cal;
  cal.target_fmr = target_fmr;
  cal.threshold = threshold;
  cal.impostor_pair_count = static_cast<std::int64_t>(scores.size());
  cal.achieved_fmr = achieved;
  return cal;
}

// Independent held-out estimate of the impostor pass rate at a threshold,
// from a fresh subsample of cross-user impression pairs.
inline double impostor_pass_rate(const Gallery& gallery, double threshold,
                                 std::int64_t pair_samples,
                                 std::uint64_t seed) {
  if (pair_samples < 1) throw UsageError("pair_samples must be >= 1");
  const auto refs = detail::flatten_impressions(gallery);
  if (detail::cross_user_pair_count(gallery) < 1)
    throw ConfigError("gallery has no cross-user pairs");
  Rng rng(derive(seed, stream::kHeldOut));
  const auto count = static_cast<std::uint64_t>(refs.size());
  std::int64_t passed = 0;
  std::int64_t drawn = 0;
  while (drawn < pair_samples) {
    const auto i = rng.uniform_below(count);
    const auto j = rng.uniform_below(count);
    if (refs[i].user_index == refs[j].user_index) continue;
    ++drawn;
    if (refs[i].impression->dot(*refs[j].impression) >= threshold) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(pair_samples);
}

// Which users a print matches, one bit per user in user_id order.
struct MatchVector {
  std::vector<std::uint8_t> bits;
  double fmr = 0.0;

  int size() const { return static_cast<int>(bits.size()); }
  int popcount() const {
    int c = 0;
    for (const auto b : bits) c += b != 0;
    return c;
  }
};

inline bool match_user(const Eigen::VectorXd& print, const UserRecord& user,
                       const FmrCalibration& cal) {
  for (const auto& impression : user.impressions)
    if (score(print, impression) >= cal.threshold) return true;
  return false;
}

inline MatchVector match_vector(const Eigen::VectorXd& print,
                                const Gallery& gallery,
                                const FmrCalibration& cal) {
  MatchVector mv;
  mv.fmr = cal.target_fmr;
  mv.bits.resize(gallery.users.size());
  for (std::size_t i = 0; i < gallery.users.size(); ++i)
    mv.bits[i] = match_user(print, gallery.users[i], cal) ? 1 : 0;
  return mv;
}

}  // namespace printdict
