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

#ifndef SPECCF_MODEL_HPP
#define SPECCF_MODEL_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "speccf/data.hpp"
#include "speccf/tensor.hpp"
#include "speccf/whitening.hpp"

namespace speccf {

/// Smallest probability kept in O; keeps every log finite.
inline constexpr double kProbabilityFloor = 1e-12;

/// Recovered latent-class model: column k of `o` is P[y | h = k], `pi` is
/// P[h = k]. Components are ordered by descending pi.
struct MomModel {
  Eigen::MatrixXd o;
  Eigen::VectorXd pi;

  Index k() const { return pi.size(); }
  Index d() const { return o.rows(); }

  /// (D - 1) K + (K - 1): posteriors are derived, not free parameters.
  std::int64_t effective_parameters() const { return (d() - 1) * k() + (k() - 1); }
};

/// Row u is P[h | u].
struct UserPosterior {
  Eigen::MatrixXd rows;
};

struct RecoveryDiagnostics {
  double lambda_mass_deviation = 0.0;  // |sum lambda_k^-2 - 1|
  std::vector<Index> clipped_entries;  // per component, entries raised to the floor
};

/// Projects a nonnegative vector with positive sum onto the simplex with
/// every entry >= floor. Entries already above the floor keep their
/// relative proportions.
Eigen::VectorXd floor_to_simplex(const Eigen::VectorXd& v, double floor);

/// Columns W+ v_k clipped at zero and normalized to the floored simplex;
/// pi_k = lambda_k^-2 renormalized. Throws kDegenerateTopic when a column
/// has no positive mass, kInvalidArgument when some lambda <= 0.
MomModel recover_parameters(const WhiteningTransform& wt,
                            const std::vector<TensorEigenpair<double>>& pairs,
                            RecoveryDiagnostics* diagnostics = nullptr);

/// P[h | history] by Bayes rule in log space. Empty history returns pi.
Eigen::VectorXd posterior_for_history(std::span<const ItemId> history, const MomModel& m);

/// Posteriors for every user; one data pass.
UserPosterior compute_posteriors(const InteractionMatrix& x, const MomModel& m);

/// P[y | user] = sum_k P[y | h = k] P[h = k | user].
Eigen::VectorXd predict_scores(std::span<const ItemId> history, const MomModel& m);
Eigen::VectorXd predict_scores_from_posterior(const Eigen::VectorXd& posterior, const MomModel& m);

/// Items by descending score, ties by ascending index, at most tau long.
/// With exclude_seen, items in `history` are removed before truncation.
std::vector<ItemId> rank_items(const Eigen::VectorXd& scores, std::span<const ItemId> history,
                               Index tau, bool exclude_seen);

std::vector<ItemId> recommend_top(std::span<const ItemId> history, const MomModel& m, Index tau,
                                  bool exclude_seen = true);

/// Text model file:
///   SPECCF 1 <D> <K>
///   <pi_1> ... <pi_K>
///   D rows of K values (rows of O)
/// Values use 17 significant digits so a read reproduces them exactly.
void write_model(std::ostream& out, const MomModel& m);
MomModel read_model(std::istream& in);
void save_model(const std::string& path, const MomModel& m);
MomModel load_model(const std::string& path);

void write_posteriors(std::ostream& out, const UserPosterior& p, const KeyIndex* users = nullptr);

}  // namespace speccf

#endif  // SPECCF_MODEL_HPP
