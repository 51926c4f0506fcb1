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

#include <catch2/catch.hpp>

#include "printdict/gallery.hpp"

using namespace printdict;

namespace {

GalleryConfig default_config() {
  GalleryConfig config;
  config.feature_dim = 32;
  config.cluster_count = 5;
  config.user_count = 200;
  config.impressions_per_user = 4;
  config.cluster_spread = 0.25;
  config.impression_noise = 0.1;
  return config;
}

bool galleries_identical(const Gallery& a, const Gallery& b) {
  if (a.user_count() != b.user_count()) return false;
  for (int u = 0; u < a.user_count(); ++u) {
    if (a.users[u].cluster_id != b.users[u].cluster_id) return false;
    for (std::size_t j = 0; j < a.users[u].impressions.size(); ++j)
      if (a.users[u].impressions[j] != b.users[u].impressions[j])
        return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero-noise single-user gallery collapses to the cluster center") {
  GalleryConfig config;
  config.feature_dim = 2;
  config.cluster_count = 1;
  config.user_count = 1;
  config.impressions_per_user = 1;
  config.cluster_spread = 0.0;
  config.impression_noise = 0.0;
  const Gallery g = generate_gallery(config, 123);
  REQUIRE(g.users.size() == 1);
  REQUIRE(g.users[0].impressions[0] == g.cluster_centers[0]);
}

TEST_CASE("gallery generation is deterministic in the seed") {
  const GalleryConfig config = default_config();
  const Gallery a = generate_gallery(config, 99);
  const Gallery b = generate_gallery(config, 99);
  REQUIRE(galleries_identical(a, b));
  const Gallery c = generate_gallery(config, 100);
  REQUIRE_FALSE(galleries_identical(a, c));
}

TEST_CASE("all impressions are unit-norm") {
  const Gallery g = generate_gallery(default_config(), 7);
  for (const auto& user : g.users)
    for (const auto& imp : user.impressions)
      REQUIRE(std::abs(imp.norm() - 1.0) < 1e-9);
}

TEST_CASE("intra-user similarity exceeds cross-user similarity") {
  // Brute force both means over all impression pairs.
  GalleryConfig config = default_config();
  const Gallery g = generate_gallery(config, 7);

  double within_sum = 0.0;
  long within_count = 0;
  double across_sum = 0.0;
  long across_count = 0;
  for (int u = 0; u < g.user_count(); ++u) {
    const auto& imps_u = g.users[u].impressions;
    for (std::size_t i = 0; i < imps_u.size(); ++i)
      for (std::size_t j = i + 1; j < imps_u.size(); ++j) {
        within_sum += imps_u[i].dot(imps_u[j]);
        ++within_count;
      }
    for (int v = u + 1; v < g.user_count(); ++v)
      for (const auto& a : imps_u)
        for (const auto& b : g.users[v].impressions) {
          across_sum += a.dot(b);
          ++across_count;
        }
  }
  REQUIRE(within_sum / within_count >= across_sum / across_count);
}

TEST_CASE("zero impression noise gives identical impressions per user") {
  GalleryConfig config = default_config();
  config.user_count = 20;
  config.impression_noise = 0.0;
  const Gallery g = generate_gallery(config, 5);
  for (const auto& user : g.users)
    for (const auto& imp : user.impressions)
      REQUIRE(imp == user.impressions[0]);
}

TEST_CASE("cluster structure: intra-cluster centers closer than inter") {
  // sigma_imp = 0 makes impressions equal the user centers, so the
  //  brute-force comparison runs directly on centers.
  GalleryConfig config = default_config();
  config.user_count = 100;
  config.cluster_spread = 0.1;
  config.impression_noise = 0.0;
  config.impressions_per_user = 1;
  const Gallery g = generate_gallery(config, 21);

  double intra = 0.0, inter = 0.0;
  long intra_n = 0, inter_n = 0;
  for (int u = 0; u < g.user_count(); ++u)
    for (int v = u + 1; v < g.user_count(); ++v) {
      const double d =
          g.users[u].impressions[0].dot(g.users[v].impressions[0]);
      if (g.users[u].cluster_id == g.users[v].cluster_id) {
        intra += d;
        ++intra_n;
      } else {
        inter += d;
        ++inter_n;
      }
    }
  REQUIRE(intra_n > 0);
  REQUIRE(inter_n > 0);
  REQUIRE(intra / intra_n > inter / inter_n);
}

TEST_CASE("split produces equal halves sharing cluster centers") {
  GalleryConfig config = default_config();
  config.user_count = 200;
  const auto [train, test] = split_train_test(config, 31);
  REQUIRE(train.user_count() == 100);
  REQUIRE(test.user_count() == 100);
  REQUIRE(train.cluster_centers.size() == test.cluster_centers.size());
  for (std::size_t c = 0; c < train.cluster_centers.size(); ++c)
    REQUIRE(train.cluster_centers[c] == test.cluster_centers[c]);

  // user ids are 0..n-1 in both halves
  for (int i = 0; i < train.user_count(); ++i) {
    REQUIRE(train.users[i].user_id == i);
    REQUIRE(test.users[i].user_id == i);
  }
}

TEST_CASE("split halves contain no duplicated draws") {
  GalleryConfig config = default_config();
  config.user_count = 80;
  const auto [train, test] = split_train_test(config, 17);
  for (const auto& a : train.users)
    for (const auto& b : test.users)
      REQUIRE(a.impressions[0] != b.impressions[0]);
}

TEST_CASE("degenerate single-cluster split shares one direction") {
  GalleryConfig config = default_config();
  config.user_count = 40;
  config.cluster_count = 1;
  config.cluster_spread = 0.0;
  const auto [train, test] = split_train_test(config, 13);
  const Eigen::VectorXd& center = train.cluster_centers[0];
  for (const Gallery* g : {&train, &test})
    for (const auto& user : g->users)
      for (const auto& imp : user.impressions)
        REQUIRE(imp.dot(center) > 0.5);
}

TEST_CASE("odd user_count is rejected for splits") {
  GalleryConfig config = default_config();
  config.user_count = 41;
  REQUIRE_THROWS_AS(split_train_test(config, 3), ConfigError);
}

TEST_CASE("invalid configurations are rejected") {
  GalleryConfig config = default_config();
  config.feature_dim = 1;
  REQUIRE_THROWS_AS(generate_gallery(config, 1), ConfigError);
  config = default_config();
  config.cluster_count = 0;
  REQUIRE_THROWS_AS(generate_gallery(config, 1), ConfigError);
  config = default_config();
  config.cluster_spread = -0.1;
  REQUIRE_THROWS_AS(generate_gallery(config, 1), ConfigError);
  config = default_config();
  config.impression_noise = -1.0;
  REQUIRE_THROWS_AS(generate_gallery(config, 1), ConfigError);
  config = default_config();
  config.user_count = 0;
  REQUIRE_THROWS_AS(generate_gallery(config, 1), ConfigError);
  config = default_config();
  config.impressions_per_user = 0;
  REQUIRE_THROWS_AS(generate_gallery(config, 1), ConfigError);
}
