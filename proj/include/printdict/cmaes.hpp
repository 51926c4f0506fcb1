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
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "printdict/errors.hpp"
#include "printdict/rng.hpp"

namespace printdict {

// Covariance Matrix Adaptation Evolution Strategy, maximization convention.
//
// Standard (mu/mu_w, lambda) variant: log-rank recombination weights,
// cumulative step-size adaptation, rank-one plus rank-mu covariance update.
// No restarts, no bound handling. ask() and tell() must alternate; fitness
// evaluation between them may happen anywhere.

struct CmaesSettings {
  int dim = 0;
  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd weights;  // mu entries, positive, non-increasing, sum 1
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;

  static CmaesSettings standard(int dim, std::optional<int> lambda_override) {
    if (dim < 1) throw ConfigError("cmaes dimension must be >= 1");
    CmaesSettings s;
    s.dim = dim;
    s.lambda = lambda_override.value_or(
        4 + static_cast<int>(std::floor(3.0 * std::log(dim))));
    if (s.lambda < 2) throw ConfigError("cmaes lambda must be >= 2");
    s.mu = std::max(1, s.lambda / 2);

    s.weights.resize(s.mu);
    for (int i = 0; i < s.mu; ++i)
      s.weights[i] = std::log(s.mu + 0.5) - std::log(i + 1.0);
    s.weights /= s.weights.sum();
    s.mu_eff = 1.0 / s.weights.squaredNorm();

    const double n = dim;
    s.c_sigma = (s.mu_eff + 2.0) / (n + s.mu_eff + 5.0);
    s.d_sigma = 1.0 +
                2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (n + 1.0)) -
                                        1.0) +
                s.c_sigma;
    s.c_c = (4.0 + s.mu_eff / n) / (n + 4.0 + 2.0 * s.mu_eff / n);
    s.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + s.mu_eff);
    s.c_mu = std::min(1.0 - s.c_1,
                      2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                          ((n + 2.0) * (n + 2.0) + s.mu_eff));
    s.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    return s;
  }
};

class Cmaes {
 public:
  Cmaes(const Eigen::VectorXd& mean0, double sigma0, std::uint64_t seed,
        std::optional<int> lambda_override = std::nullopt)
      : settings_(CmaesSettings::standard(static_cast<int>(mean0.size()),
                                          lambda_override)),
        mean_(mean0),
        sigma_(sigma0),
        covariance_(Eigen::MatrixXd::Identity(mean0.size(), mean0.size())),
        path_sigma_(Eigen::VectorXd::Zero(mean0.size())),
        path_c_(Eigen::VectorXd::Zero(mean0.size())),
        rng_(derive(seed, stream::kCmaes)) {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
      throw ConfigError("cmaes sigma0 must be positive and finite");
    refresh_decomposition();
  }

  const CmaesSettings& settings() const { return settings_; }
  int generation() const { return generation_; }
  double sigma() const { return sigma_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  // Samples lambda candidates mean + sigma * B * D * g.
  std::vector<Eigen::VectorXd> ask() {
    refresh_decomposition();
    std::vector<Eigen::VectorXd> candidates;
    candidates.reserve(settings_.lambda);
    for (int k = 0; k < settings_.lambda; ++k) {
      const Eigen::VectorXd g = rng_.gaussian_vector(settings_.dim);
      candidates.push_back(mean_ +
                           sigma_ * (eigen_basis_ *
                                     (eigen_scale_.asDiagonal() * g)));
    }
    return candidates;
  }

  // Rank-based distribution update; larger fitness is better. Ties are
  // broken by candidate index (stable sort).
  void tell(const std::vector<Eigen::VectorXd>& candidates,
            const std::vector<double>& fitnesses) {
    const int lambda = settings_.lambda;
    if (static_cast<int>(candidates.size()) != lambda ||
        static_cast<int>(fitnesses.size()) != lambda)
      throw UsageError("tell: need exactly lambda candidates and fitnesses");
    for (const double f : fitnesses)
      if (!std::isfinite(f)) throw UsageError("tell: non-finite fitness");

    std::vector<int> order(lambda);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fitnesses[a] > fitnesses[b];
    });

    refresh_decomposition();
    const auto& s = settings_;
    const Eigen::VectorXd old_mean = mean_;

    mean_.setZero();
    for (int i = 0; i < s.mu; ++i)
      mean_ += s.weights[i] * candidates[order[i]];

    const Eigen::VectorXd y_w = (mean_ - old_mean) / sigma_;

    // C^{-1/2} y_w through the cached eigendecomposition.
    const Eigen::VectorXd whitened =
        eigen_basis_ *
        (eigen_scale_.cwiseInverse().asDiagonal() *
         (eigen_basis_.transpose() * y_w));
    path_sigma_ = (1.0 - s.c_sigma) * path_sigma_ +
                  std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) *
                      whitened;

    ++generation_;
    const double ps_norm = path_sigma_.norm();
    const bool hsig =
        ps_norm / std::sqrt(1.0 - std::pow(1.0 - s.c_sigma,
                                           2.0 * generation_)) /
            s.chi_n <
        1.4 + 2.0 / (s.dim + 1.0);

    path_c_ = (1.0 - s.c_c) * path_c_ +
              (hsig ? std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) : 0.0) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(s.dim, s.dim);
    for (int i = 0; i < s.mu; ++i) {
      const Eigen::VectorXd y = (candidates[order[i]] - old_mean) / sigma_;
      rank_mu.noalias() += s.weights[i] * (y * y.transpose());
    }

    covariance_ = (1.0 - s.c_1 - s.c_mu) * covariance_ +
                  s.c_1 * (path_c_ * path_c_.transpose() +
                           (hsig ? 0.0 : s.c_c * (2.0 - s.c_c)) * covariance_) +
                  s.c_mu * rank_mu;
    covariance_ = 0.5 * (covariance_ + covariance_.transpose().eval());

    sigma_ *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
    if (!std::isfinite(sigma_) || !(sigma_ > 0.0)) {
      std::ostringstream oss;
      oss << "cmaes step size became invalid (sigma=" << sigma_
          << ", generation=" << generation_ << ")";
      throw NumericalError(oss.str());
    }
    decomposition_fresh_ = false;
  }

 private:
  // Eigendecomposes C = B * D^2 * B^T, flooring eigenvalues at 1e-14 and
  // rebuilding C if any had to be repaired.
  void refresh_decomposition() {
    if (decomposition_fresh_) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance_);
    if (solver.info() != Eigen::Success) {
      std::ostringstream oss;
      oss << "cmaes covariance eigendecomposition failed (generation="
          << generation_ << ", sigma=" << sigma_ << ")";
      throw NumericalError(oss.str());
    }
    Eigen::VectorXd values = solver.eigenvalues();
    constexpr double kFloor = 1e-14;
    bool repaired = false;
    for (int i = 0; i < values.size(); ++i) {
      if (values[i] < kFloor) {
        values[i] = kFloor;
        repaired = true;
      }
    }
    eigen_basis_ = solver.eigenvectors();
    eigen_scale_ = values.cwiseSqrt();
    if (repaired) {
      covariance_ = eigen_basis_ * values.asDiagonal() *
                    eigen_basis_.transpose();
      covariance_ = 0.5 * (covariance_ + covariance_.transpose().eval());
    }
    decomposition_fresh_ = true;
  }

  CmaesSettings settings_;
  Eigen::VectorXd mean_;
  double sigma_;
  Eigen::MatrixXd covariance_;
  Eigen::VectorXd path_sigma_;
  Eigen::VectorXd path_c_;
  Eigen::MatrixXd eigen_basis_;   // B
  Eigen::VectorXd eigen_scale_;   // D, sqrt of eigenvalues
  bool decomposition_fresh_ = false;
  int generation_ = 0;
  Rng rng_;
};

}  // namespace printdict
