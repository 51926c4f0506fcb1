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
#include <Eigen/QR>

#include <cstdint>

#include "printdict/errors.hpp"
#include "printdict/gallery.hpp"
#include "printdict/rng.hpp"

namespace printdict {

// Fixed smooth map from latent vectors to unit-norm templates. Plays the
// decoder role: columns are biased toward the gallery's cluster centers so
// every enrolled cluster is reachable from latent space.

struct GeneratorParams {
  Eigen::MatrixXd projection;  // feature_dim x latent_dim, unit-norm columns
  Eigen::VectorXd offset;      // feature_dim
  std::uint64_t seed = 0;

  int feature_dim() const { return static_cast<int>(projection.rows()); }
  int latent_dim() const { return static_cast<int>(projection.cols()); }
};

inline GeneratorParams build_generator(int feature_dim, int latent_dim,
                                       std::uint64_t seed,
                                       const Gallery& gallery) {
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (latent_dim > feature_dim)
    throw ConfigError("latent_dim must not exceed feature_dim");
  if (gallery.feature_dim() != feature_dim)
    throw ConfigError("generator feature_dim does not match gallery");

  const int biased_columns =
      std::min<int>(static_cast<int>(gallery.cluster_centers.size()),
                    latent_dim);

  // Rejection-resample on the seed until the projection has full column
  // rank. A rank-deficient draw has measure zero but would make parts of
  // latent space redundant.
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive(seed, stream::kGeneratorColumns, attempt));
    Eigen::MatrixXd projection(feature_dim, latent_dim);
    for (int j = 0; j < latent_dim; ++j) {
      Eigen::VectorXd column = rng.gaussian_vector(feature_dim);
      const double gauss_norm = column.norm();
      if (gauss_norm <= 1e-12) {
        projection.setZero();  // force a resample
        break;
      }
      // The noise direction is unit-normalized before blending so the 0.7
      // center weight keeps the column aligned with its cluster regardless
      // of the feature dimension.
      if (j < biased_columns)
        column = 0.7 * gallery.cluster_centers[j] +
                 0.3 * (column / gauss_norm);
      const double norm = column.norm();
      if (norm <= 1e-12) {
        projection.setZero();
        break;
      }
      projection.col(j) = column / norm;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(projection);
    if (qr.rank() == latent_dim) {
      GeneratorParams params;
      params.projection = std::move(projection);
      params.offset = Eigen::VectorXd::Zero(feature_dim);
      params.seed = seed;
      return params;
    }
  }
}

// normalize(projection * tanh(z) + offset); smooth in z and always unit-norm.
inline Eigen::VectorXd generate(const GeneratorParams& params,
                                const Eigen::VectorXd& latent) {
  if (latent.size() != params.latent_dim())
    throw UsageError("latent vector dimension does not match generator");
  const Eigen::VectorXd raw =
      params.projection * latent.array().tanh().matrix() + params.offset;
  const double norm = raw.norm();
  if (norm <= 1e-12)
    throw DegenerateOutputError(
        "generator output cannot be normalized (zero pre-normalization "
        "vector)");
  return raw / norm;
}

}  // namespace printdict
