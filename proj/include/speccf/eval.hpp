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

#ifndef SPECCF_EVAL_HPP
#define SPECCF_EVAL_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "speccf/data.hpp"

namespace speccf {

/// Cutoffs used for the standard precision/recall curves.
inline const std::vector<Index> kDefaultTauList = {5, 10, 20, 40, 60, 80, 100, 200, 300, 400, 500};

struct RankingMetrics {
  std::vector<Index> tau_list;
  std::vector<double> precision;  // per-tau means
  std::vector<double> recall;
  std::vector<double> map;
  Index n_users_evaluated = 0;
  Index n_users_skipped = 0;  // users with an empty test set
};

/// Precision@tau = hits / tau, Recall@tau = hits / |test|, and
/// AP@tau = sum over relevant ranks r <= tau of Precision@r, divided by
/// min(tau, |test|). Users whose test set is empty are skipped.
/// recommendations[u] and test[u] describe the same user u.
RankingMetrics ranking_metrics(const std::vector<std::vector<ItemId>>& recommendations,
                               const std::vector<std::vector<ItemId>>& test,
                               std::span<const Index> tau_list);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

/// "tau<TAB>precision<TAB>recall<TAB>map" header plus one row per cutoff.
void write_metrics_report(std::ostream& out, const RankingMetrics& m);

struct HoldoutSplit {
  InteractionMatrix train;
  InteractionMatrix test;
};

/// Moves round(fraction * nnz) of each user's items (at least one, and
/// never all of them) into the test matrix. Users with fewer than two
/// items stay entirely in train.
HoldoutSplit split_holdout(const InteractionMatrix& x, double fraction, std::uint64_t seed);

/// Random permutation of unseen items, truncated to tau.
std::vector<ItemId> random_ranking(Index n_items, std::span<const ItemId> history, Index tau,
                                   std::uint64_t seed, std::uint64_t user);

}  // namespace speccf

#endif  // SPECCF_EVAL_HPP
