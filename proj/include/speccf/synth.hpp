// Copyright 2026 The speccf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECCF_SYNTH_HPP
#define SPECCF_SYNTH_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "speccf/data.hpp"
#include "speccf/model.hpp"
#include "speccf/moments.hpp"

namespace speccf {

/// Ground truth for the latent-class generative model.
struct PlantedModel {
  enum class UserPrior {
    kShared,     // P[h | u] = pi_true for every user
    kDirichlet,  // P[h | u] ~ Dirichlet(alpha * K * pi_true) per user
  };
  enum class LatentDraw {
    kPerUser,  // one h per user, shared by all of the user's items
    kPerItem,  // a fresh h before every item draw
  };

  Eigen::MatrixXd o_true;  // D x K, columns sum to 1
  Eigen::VectorXd pi_true;
  UserPrior user_prior = UserPrior::kShared;
  double dirichlet_alpha = 1.0;
  LatentDraw latent_draw = LatentDraw::kPerUser;
  Index min_items = 3;  // n_u ~ uniform on [min_items, max_items]
  Index max_items = 10;

  Index k() const { return pi_true.size(); }
  Index d() const { return o_true.rows(); }

  MomModel as_model() const { return MomModel{o_true, pi_true}; }
};

/// Columns drawn from Dirichlet(concentration) over all D items; pi from
/// Dirichlet(pi_concentration) (uniform pi when pi_concentration <= 0).
PlantedModel random_planted(Index k, Index d, std::uint64_t seed, double concentration = 0.5,
                            double pi_concentration = 0.0);

/// Component c puts all its mass on a contiguous block of about D / K
/// items. Within a block, weights are uniform when `within_concentration`
/// <= 0, else Dirichlet(within_concentration).
PlantedModel separable_planted(Index k, Index d, std::uint64_t seed,
                               double within_concentration = 0.0,
                               const Eigen::VectorXd& pi = {});

/// Samples N users. Each user draws n_u, then draws items until n_u
/// distinct ones are collected, giving up after 100 * n_u draws.
/// Per-user streams make the result independent of thread scheduling.
/// Throws kInvalidArgument when max_items > D.
InteractionMatrix sample_dataset(const PlantedModel& p, Index n_users, std::uint64_t seed);

/// Population moments sum_k pi_k mu_k mu_k^T and sum_k pi_k (W^T mu_k)^{(x)3}.
PairwiseMoment population_m2(const PlantedModel& p);
WhitenedTriple population_whitened_m3(const PlantedModel& p, const Eigen::MatrixXd& w);

/// Item marginal sum_k pi_k mu_k.
Eigen::VectorXd population_m1(const PlantedModel& p);

/// perm[k] is the estimated column matched to true column k. Maximizes the
/// total cosine similarity exactly for K <= 10, greedily beyond.
std::vector<Index> align_columns(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

struct RecoveryReport {
  std::vector<Index> perm;
  Eigen::VectorXd mu_errors;  // |mu_k - mu_hat_perm(k)|_2
  Eigen::VectorXd pi_errors;  // |pi_k - pi_hat_perm(k)|
  double max_mu_error = 0.0;
  double max_pi_error = 0.0;
};

RecoveryReport align_and_error(const PlantedModel& truth, const MomModel& est);

}  // namespace speccf

#endif  // SPECCF_SYNTH_HPP
