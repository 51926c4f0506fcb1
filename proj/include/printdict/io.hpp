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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "printdict/errors.hpp"
#include "printdict/experiment.hpp"
#include "printdict/gallery.hpp"
#include "printdict/generator.hpp"
#include "printdict/search.hpp"

namespace printdict {

// JSON persistence. Doubles are serialized with the shortest decimal
// representation that reparses to the same value, so load(save(x)) == x.

namespace io {

using nlohmann::json;

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path.string());
    out << content;
    if (!out.good()) throw ConfigError("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot move file into place: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON in " + what);
  return j;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Eigen::VectorXd vector_from_json(const json& arr) {
  if (!arr.is_array()) throw ConfigError("expected a JSON array of numbers");
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    v[static_cast<int>(i)] = arr[i].get<double>();
  return v;
}

// --- gallery ---------------------------------------------------------------

inline json gallery_to_json(const Gallery& gallery) {
  json j;
  j["format"] = "printdict.gallery";
  j["version"] = 1;
  j["feature_dim"] = gallery.config.feature_dim;
  j["cluster_count"] = gallery.config.cluster_count;
  j["user_count"] = gallery.config.user_count;
  j["impressions_per_user"] = gallery.config.impressions_per_user;
  j["cluster_spread"] = gallery.config.cluster_spread;
  j["impression_noise"] = gallery.config.impression_noise;
  j["seed"] = gallery.seed;
  json centers = json::array();
  for (const auto& c : gallery.cluster_centers)
    centers.push_back(vector_to_json(c));
  j["cluster_centers"] = std::move(centers);
  json users = json::array();
  for (const auto& user : gallery.users) {
    json u;
    u["user_id"] = user.user_id;
    u["cluster_id"] = user.cluster_id;
    json imps = json::array();
    for (const auto& imp : user.impressions)
      imps.push_back(vector_to_json(imp));
    u["impressions"] = std::move(imps);
    users.push_back(std::move(u));
  }
  j["users"] = std::move(users);
  return j;
}

inline Gallery gallery_from_json(const json& j) {
  if (j.value("format", "") != "printdict.gallery")
    throw ConfigError("not a gallery file");
  Gallery gallery;
  gallery.config.feature_dim = j.at("feature_dim").get<int>();
  gallery.config.cluster_count = j.at("cluster_count").get<int>();
  gallery.config.user_count = j.at("user_count").get<int>();
  gallery.config.impressions_per_user =
      j.at("impressions_per_user").get<int>();
  gallery.config.cluster_spread = j.at("cluster_spread").get<double>();
  gallery.config.impression_noise = j.at("impression_noise").get<double>();
  gallery.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& c : j.at("cluster_centers"))
    gallery.cluster_centers.push_back(vector_from_json(c));
  for (const auto& u : j.at("users")) {
    UserRecord user;
    user.user_id = u.at("user_id").get<int>();
    user.cluster_id = u.at("cluster_id").get<int>();
    for (const auto& imp : u.at("impressions"))
      user.impressions.push_back(vector_from_json(imp));
    gallery.users.push_back(std::move(user));
  }
  return gallery;
}

inline void save_gallery(const Gallery& gallery,
                         const std::filesystem::path& path) {
  write_file_atomic(path, gallery_to_json(gallery).dump(1) + "\n");
}

inline Gallery load_gallery(const std::filesystem::path& path) {
  return gallery_from_json(parse_json(read_file(path), path.string()));
}

// --- generator --------------------------------------------------------------

inline json generator_to_json(const GeneratorParams& params) {
  json j;
  j["format"] = "printdict.generator";
  j["version"] = 1;
  j["feature_dim"] = params.feature_dim();
  j["latent_dim"] = params.latent_dim();
  j["seed"] = params.seed;
  j["offset"] = vector_to_json(params.offset);
  json rows = json::array();  // row-major
  for (int r = 0; r < params.projection.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < params.projection.cols(); ++c)
      row.push_back(params.projection(r, c));
    rows.push_back(std::move(row));
  }
  j["projection"] = std::move(rows);
  return j;
}

inline GeneratorParams generator_from_json(const json& j) {
  if (j.value("format", "") != "printdict.generator")
    throw ConfigError("not a generator file");
  GeneratorParams params;
  const int m = j.at("feature_dim").get<int>();
  const int n = j.at("latent_dim").get<int>();
  params.seed = j.at("seed").get<std::uint64_t>();
  params.offset = vector_from_json(j.at("offset"));
  params.projection.resize(m, n);
  const auto& rows = j.at("projection");
  if (static_cast<int>(rows.size()) != m)
    throw ConfigError("generator projection row count mismatch");
  for (int r = 0; r < m; ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) != n)
      throw ConfigError("generator projection column count mismatch");
    for (int c = 0; c < n; ++c) params.projection(r, c) = row[c].get<double>();
  }
  return params;
}

inline void save_generator(const GeneratorParams& params,
                           const std::filesystem::path& path) {
  write_file_atomic(path, generator_to_json(params).dump(1) + "\n");
}

inline GeneratorParams load_generator(const std::filesystem::path& path) {
  return generator_from_json(parse_json(read_file(path), path.string()));
}

// --- dictionaries -----------------------------------------------------------

inline std::string bits_to_string(const MatchVector& mv) {
  std::string s(mv.bits.size(), '0');
  for (std::size_t i = 0; i < mv.bits.size(); ++i)
    if (mv.bits[i]) s[i] = '1';
  return s;
}

inline MatchVector bits_from_string(const std::string& s, double fmr) {
  MatchVector mv;
  mv.fmr = fmr;
  mv.bits.reserve(s.size());
  for (const char c : s) {
    if (c != '0' && c != '1')
      throw ConfigError("malformed match-vector bitstring");
    mv.bits.push_back(c == '1' ? 1 : 0);
  }
  return mv;
}

inline json dictionary_to_json(const PrintDictionary& dict) {
  json j;
  j["format"] = "printdict.dictionary";
  j["version"] = 1;
  j["fmr"] = dict.fmr;
  j["max_size"] = dict.max_size;
  j["seed"] = dict.seed;
  j["evaluations_used"] = dict.evaluations_used;
  json entries = json::array();
  for (const auto& entry : dict.entries) {
    json e;
    e["strategy"] = strategy_name(entry.strategy);
    e["genome"] = vector_to_json(entry.genome);
    e["match_train"] = bits_to_string(entry.match_train);
    e["fitness"] = entry.fitness;
    e["generation_budget"] = entry.generation_budget;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline Strategy strategy_from_name(const std::string& name) {
  if (name == "random") return Strategy::kRandom;
  if (name == "single") return Strategy::kSingle;
  if (name == "diversity") return Strategy::kDiversity;
  if (name == "novelty") return Strategy::kNovelty;
  throw ConfigError("unknown strategy '" + name + "'");
}

inline PrintDictionary dictionary_from_json(const json& j) {
  if (j.value("format", "") != "printdict.dictionary")
    throw ConfigError("not a dictionary file");
  PrintDictionary dict;
  dict.fmr = j.at("fmr").get<double>();
  dict.max_size = j.at("max_size").get<int>();
  dict.seed = j.at("seed").get<std::uint64_t>();
  dict.evaluations_used = j.at("evaluations_used").get<std::int64_t>();
  for (const auto& e : j.at("entries")) {
    DictionaryEntry entry;
    entry.strategy = strategy_from_name(e.at("strategy").get<std::string>());
    entry.genome = vector_from_json(e.at("genome"));
    entry.match_train =
        bits_from_string(e.at("match_train").get<std::string>(), dict.fmr);
    entry.fitness = e.at("fitness").get<double>();
    entry.generation_budget = e.at("generation_budget").get<int>();
    dict.entries.push_back(std::move(entry));
  }
  return dict;
}

// --- experiment config ------------------------------------------------------

inline json experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["feature_dim"] = config.gallery.feature_dim;
  j["cluster_count"] = config.gallery.cluster_count;
  j["user_count"] = config.gallery.user_count;
  j["impressions_per_user"] = config.gallery.impressions_per_user;
  j["cluster_spread"] = config.gallery.cluster_spread;
  j["impression_noise"] = config.gallery.impression_noise;
  j["latent_dim"] = config.latent_dim;
  j["fmr_levels"] = config.fmr_levels;
  json strategies = json::array();
  for (const Strategy s : config.strategies)
    strategies.push_back(strategy_name(s));
  j["strategies"] = std::move(strategies);
  j["trials"] = config.trials;
  j["max_dict_size"] = config.max_dict_size;
  j["per_print_generations"] = config.per_print_generations;
  j["single_print_generations"] = config.single_print_generations;
  j["master_seed"] = config.master_seed;
  j["sigma0"] = config.sigma0;
  return j;
}

// Partial configs are fine: absent keys keep their defaults.
inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig config;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  config.gallery.feature_dim =
      j.value("feature_dim", config.gallery.feature_dim);
  config.gallery.cluster_count =
      j.value("cluster_count", config.gallery.cluster_count);
  config.gallery.user_count =
      j.value("user_count", config.gallery.user_count);
  config.gallery.impressions_per_user =
      j.value("impressions_per_user", config.gallery.impressions_per_user);
  config.gallery.cluster_spread =
      j.value("cluster_spread", config.gallery.cluster_spread);
  config.gallery.impression_noise =
      j.value("impression_noise", config.gallery.impression_noise);
  config.latent_dim = j.value("latent_dim", config.latent_dim);
  if (j.contains("fmr_levels"))
    config.fmr_levels = j.at("fmr_levels").get<std::vector<double>>();
  if (j.contains("strategies")) {
    config.strategies.clear();
    for (const auto& name : j.at("strategies"))
      config.strategies.push_back(
          strategy_from_name(name.get<std::string>()));
  }
  config.trials = j.value("trials", config.trials);
  config.max_dict_size = j.value("max_dict_size", config.max_dict_size);
  config.per_print_generations =
      j.value("per_print_generations", config.per_print_generations);
  config.single_print_generations =
      j.value("single_print_generations", config.single_print_generations);
  config.master_seed = j.value("master_seed", config.master_seed);
  config.sigma0 = j.value("sigma0", config.sigma0);
  return config;
}

}  // namespace io

}  // namespace printdict
