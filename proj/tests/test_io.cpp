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

#include <cstdio>
#include <filesystem>

#include "printdict/io.hpp"

using namespace printdict;

namespace {

std::filesystem::path temp_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "printdict_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

GalleryConfig small_gallery_config() {
  GalleryConfig config;
  config.feature_dim = 6;
  config.cluster_count = 2;
  config.user_count = 10;
  config.impressions_per_user = 3;
  config.cluster_spread = 0.2;
  config.impression_noise = 0.05;
  return config;
}

}  // namespace

TEST_CASE("gallery save/load round-trips value-exactly") {
  const Gallery g = generate_gallery(small_gallery_config(), 12345);
  const auto path = temp_dir() / "gallery.json";
  io::save_gallery(g, path);
  const Gallery loaded = io::load_gallery(path);

  REQUIRE(loaded.seed == g.seed);
  REQUIRE(loaded.config.feature_dim == g.config.feature_dim);
  REQUIRE(loaded.config.cluster_count == g.config.cluster_count);
  REQUIRE(loaded.config.user_count == g.config.user_count);
  REQUIRE(loaded.config.impressions_per_user ==
          g.config.impressions_per_user);
  REQUIRE(loaded.config.cluster_spread == g.config.cluster_spread);
  REQUIRE(loaded.config.impression_noise == g.config.impression_noise);
  REQUIRE(loaded.cluster_centers.size() == g.cluster_centers.size());
  for (std::size_t c = 0; c < g.cluster_centers.size(); ++c)
    REQUIRE(loaded.cluster_centers[c] == g.cluster_centers[c]);
  REQUIRE(loaded.users.size() == g.users.size());
  for (std::size_t u = 0; u < g.users.size(); ++u) {
    REQUIRE(loaded.users[u].user_id == g.users[u].user_id);
    REQUIRE(loaded.users[u].cluster_id == g.users[u].cluster_id);
    for (std::size_t j = 0; j < g.users[u].impressions.size(); ++j)
      REQUIRE(loaded.users[u].impressions[j] == g.users[u].impressions[j]);
  }
}

TEST_CASE("generator save/load round-trips value-exactly") {
  const Gallery g = generate_gallery(small_gallery_config(), 5);
  const GeneratorParams params = build_generator(6, 3, 17, g);
  const auto path = temp_dir() / "generator.json";
  io::save_generator(params, path);
  const GeneratorParams loaded = io::load_generator(path);
  REQUIRE(loaded.seed == params.seed);
  REQUIRE(loaded.projection == params.projection);
  REQUIRE(loaded.offset == params.offset);
}

TEST_CASE("dictionary JSON round-trips value-exactly") {
  PrintDictionary dict;
  dict.fmr = 0.01;
  dict.max_size = 10;
  dict.seed = 99;
  dict.evaluations_used = 1234;
  DictionaryEntry entry;
  entry.strategy = Strategy::kNovelty;
  entry.genome = Eigen::VectorXd::Random(5);
  entry.match_train.bits = {1, 0, 1, 1, 0};
  entry.match_train.fmr = 0.01;
  entry.fitness = 0.625;
  entry.generation_budget = 1000;
  dict.entries.push_back(entry);

  const auto j = io::dictionary_to_json(dict);
  const PrintDictionary loaded =
      io::dictionary_from_json(io::json::parse(j.dump()));
  REQUIRE(loaded.fmr == dict.fmr);
  REQUIRE(loaded.max_size == dict.max_size);
  REQUIRE(loaded.seed == dict.seed);
  REQUIRE(loaded.evaluations_used == dict.evaluations_used);
  REQUIRE(loaded.entries.size() == 1);
  REQUIRE(loaded.entries[0].strategy == Strategy::kNovelty);
  REQUIRE(loaded.entries[0].genome == entry.genome);
  REQUIRE(loaded.entries[0].match_train.bits == entry.match_train.bits);
  REQUIRE(loaded.entries[0].fitness == entry.fitness);
  REQUIRE(loaded.entries[0].generation_budget == entry.generation_budget);
}

TEST_CASE("experiment config JSON honors defaults for absent keys") {
  const auto j = io::parse_json("{\"trials\": 3, \"fmr_levels\": [0.05]}",
                                "test");
  const ExperimentConfig config = io::experiment_config_from_json(j);
  REQUIRE(config.trials == 3);
  REQUIRE(config.fmr_levels == std::vector<double>{0.05});
  REQUIRE(config.gallery.user_count == 400);  // default preserved
  REQUIRE(config.latent_dim == 16);
  REQUIRE(config.strategies.size() == 4);
}

TEST_CASE("experiment config JSON round-trips") {
  ExperimentConfig config;
  config.trials = 4;
  config.master_seed = 321;
  config.fmr_levels = {0.01, 0.001};
  config.strategies = {Strategy::kSingle, Strategy::kNovelty};
  config.gallery.cluster_spread = 0.33;
  const auto j = io::experiment_config_to_json(config);
  const ExperimentConfig loaded = io::experiment_config_from_json(j);
  REQUIRE(loaded.trials == config.trials);
  REQUIRE(loaded.master_seed == config.master_seed);
  REQUIRE(loaded.fmr_levels == config.fmr_levels);
  REQUIRE(loaded.strategies == config.strategies);
  REQUIRE(loaded.gallery.cluster_spread == config.gallery.cluster_spread);
}

TEST_CASE("malformed inputs are rejected with config errors") {
  REQUIRE_THROWS_AS(io::parse_json("{nope", "test"), ConfigError);
  REQUIRE_THROWS_AS(io::load_gallery(temp_dir() / "does_not_exist.json"),
                    ConfigError);
  REQUIRE_THROWS_AS(
      io::gallery_from_json(io::parse_json("{\"format\": \"other\"}", "t")),
      ConfigError);
  REQUIRE_THROWS_AS(io::strategy_from_name("bogus"), ConfigError);
  REQUIRE_THROWS_AS(io::bits_from_string("01x", 0.01), ConfigError);
}

TEST_CASE("atomic writes leave no temp file behind") {
  const auto path = temp_dir() / "atomic.txt";
  io::write_file_atomic(path, "hello");
  REQUIRE(io::read_file(path) == "hello");
  REQUIRE_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}
