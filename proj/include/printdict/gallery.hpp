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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "printdict/errors.hpp"
#include "printdict/rng.hpp"

namespace printdict {

// Synthetic enrollment database. Users live on the unit sphere in a
// C-cluster mixture: a single template can plausibly cover one cluster,
// covering everyone requires several.

struct GalleryConfig {
  int feature_dim = 32;        // m
  int cluster_count = 5;       // C
  int user_count = 400;        // total users (train + test for a split)
  int impressions_per_user = 4;
  double cluster_spread = 0.16;
  double impression_noise = 0.12;

  void validate() const {
    if (feature_dim < 2) throw ConfigError("feature_dim must be >= 2");
    if (cluster_count < 1) throw ConfigError("cluster_count must be >= 1");
    if (user_count < 1) throw ConfigError("user_count must be >= 1");
    if (impressions_per_user < 1)
      throw ConfigError("impressions_per_user must be >= 1");
    if (cluster_spread < 0) throw ConfigError("cluster_spread must be >= 0");
    if (impression_noise < 0)
      throw ConfigError("impression_noise must be >= 0");
  }
};

struct UserRecord {
  int user_id = 0;
  int cluster_id = 0;
  std::vector<Eigen::VectorXd> impressions;
};

struct Gallery {
  GalleryConfig config;
  std::uint64_t seed = 0;
  std::vector<Eigen::VectorXd> cluster_centers;
  std::vector<UserRecord> users;

  int feature_dim() const { return config.feature_dim; }
  int user_count() const { return static_cast<int>(users.size()); }
};

namespace detail {

inline Eigen::VectorXd unit_sphere_point(Rng& rng, int dim) {
  for (;;) {
    Eigen::VectorXd v = rng.gaussian_vector(dim);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

// Adds spread*g to the base direction and renormalizes. spread == 0 returns
// the base unchanged so zero-noise draws collapse exactly.
inline Eigen::VectorXd perturb_on_sphere(const Eigen::VectorXd& base,
                                         double spread, Rng& rng) {
  if (spread == 0.0) return base;
  Eigen::VectorXd v = base + spread * rng.gaussian_vector(base.size());
  const double norm = v.norm();
  if (norm <= 1e-12)
    throw NumericalError("degenerate draw while perturbing on sphere");
  return v / norm;
}

inline std::vector<Eigen::VectorXd> draw_cluster_centers(
    const GalleryConfig& config, std::uint64_t seed) {
  Rng rng(derive(seed, stream::kClusterCenters));
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(config.cluster_count);
  for (int c = 0; c < config.cluster_count; ++c)
    centers.push_back(unit_sphere_point(rng, config.feature_dim));
  return centers;
}

// Users are indexed by a global id so train/test halves of a split draw from
// disjoint substreams of the same seed.
inline UserRecord draw_user(const GalleryConfig& config, std::uint64_t seed,
                            const std::vector<Eigen::VectorXd>& centers,
                            int global_user_index, int local_user_id) {
  Rng user_rng(derive(seed, stream::kUserCenter, global_user_index));
  UserRecord user;
  user.user_id = local_user_id;
  user.cluster_id = static_cast<int>(
      user_rng.uniform_below(static_cast<std::uint64_t>(centers.size())));
  const Eigen::VectorXd center = perturb_on_sphere(
      centers[user.cluster_id], config.cluster_spread, user_rng);
  user.impressions.reserve(config.impressions_per_user);
  for (int j = 0; j < config.impressions_per_user; ++j) {
    Rng imp_rng(derive(seed, stream::kImpression, global_user_index, j));
    user.impressions.push_back(
        perturb_on_sphere(center, config.impression_noise, imp_rng));
  }
  return user;
}

}  // namespace detail

inline Gallery generate_gallery(const GalleryConfig& config,
                                std::uint64_t seed) {
  config.validate();
  Gallery gallery;
  gallery.config = config;
  gallery.seed = seed;
  gallery.cluster_centers = detail::draw_cluster_centers(config, seed);
  gallery.users.reserve(config.user_count);
  for (int i = 0; i < config.user_count; ++i)
    gallery.users.push_back(
        detail::draw_user(config, seed, gallery.cluster_centers, i, i));
  return gallery;
}

// Splits config.user_count users into equal train/test galleries. Both
// halves share the seed-derived cluster centers; the user draws are disjoint
// substreams, so no user appears in both.
inline std::pair<Gallery, Gallery> split_train_test(const GalleryConfig& config,
                                                    std::uint64_t seed) {
  config.validate();
  if (config.user_count % 2 != 0)
    throw ConfigError("split_train_test requires an even user_count");
  const int half = config.user_count / 2;

  GalleryConfig half_config = config;
  half_config.user_count = half;

  Gallery train, test;
  train.config = half_config;
  test.config = half_config;
  train.seed = seed;
  test.seed = seed;
  train.cluster_centers = detail::draw_cluster_centers(config, seed);
  test.cluster_centers = train.cluster_centers;
  train.users.reserve(half);
  test.users.reserve(half);
  for (int i = 0; i < half; ++i)
    train.users.push_back(
        detail::draw_user(config, seed, train.cluster_centers, i, i));
  for (int i = 0; i < half; ++i)
    test.users.push_back(
        detail::draw_user(config, seed, test.cluster_centers, half + i, i));
  return {std::move(train), std::move(test)};
}

}  // namespace printdict
