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

#include "speccf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "speccf/error.hpp"
#include "speccf/parallel.hpp"
#include "speccf/rng.hpp"

namespace speccf {

namespace {

constexpr std::uint64_t kSampleStream = 0x73616d70;

std::vector<double> cumulative(const Eigen::Ref<const Eigen::VectorXd>& p) {
  std::vector<double> c(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    c[static_cast<std::size_t>(i)] = acc;
  }
  return c;
}

}  // namespace

PlantedModel random_planted(Index k, Index d, std::uint64_t seed, double concentration,
                            double pi_concentration) {
  if (k < 1 || d < k) throw Error(ErrorKind::kInvalidArgument, "need 1 <= K <= D");
  CounterRng rng(seed, 0x706c616e);
  PlantedModel p;
  p.o_true.resize(d, k);
  for (Index c = 0; c < k; ++c) p.o_true.col(c) = rng.dirichlet(d, concentration);
  p.pi_true = pi_concentration > 0.0
                  ? rng.dirichlet(k, pi_concentration)
                  : Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  return p;
}

PlantedModel separable_planted(Index k, Index d, std::uint64_t seed,
                               double within_concentration, const Eigen::VectorXd& pi) {
  if (k < 1 || d < k) throw Error(ErrorKind::kInvalidArgument, "need 1 <= K <= D");
  CounterRng rng(seed, 0x73657061);
  PlantedModel p;
  p.o_true = Eigen::MatrixXd::Zero(d, k);
  for (Index c = 0; c < k; ++c) {
    const Index begin = d * c / k;
    const Index end = d * (c + 1) / k;
    const Index len = end - begin;
    p.o_true.col(c).segment(begin, len) =
        within_concentration > 0.0
            ? rng.dirichlet(len, within_concentration)
            : Eigen::VectorXd::Constant(len, 1.0 / static_cast<double>(len));
  }
  if (pi.size() == 0) {
    p.pi_true = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  } else {
    if (pi.size() != k) throw Error(ErrorKind::kDimensionMismatch, "pi length != K");
    p.pi_true = pi / pi.sum();
  }
  return p;
}

InteractionMatrix sample_dataset(const PlantedModel& p, Index n_users, std::uint64_t seed) {
  const Index k = p.k();
  const Index d = p.d();
  if (n_users < 1) throw Error(ErrorKind::kInvalidArgument, "N must be >= 1");
  if (p.o_true.cols() != k) throw Error(ErrorKind::kDimensionMismatch, "O and pi disagree on K");
  if (p.min_items < 1 || p.min_items > p.max_items) {
    throw Error(ErrorKind::kInvalidArgument, "items-per-user range is empty");
  }
  if (p.max_items > d) {
    throw Error(ErrorKind::kInvalidArgument,
                "n_u up to " + std::to_string(p.max_items) + " exceeds D = " + std::to_string(d));
  }
  std::vector<std::vector<double>> item_cdf;
  for (Index c = 0; c < k; ++c) item_cdf.push_back(cumulative(p.o_true.col(c)));
  const std::vector<double> pi_cdf = cumulative(p.pi_true);

  std::vector<std::vector<ItemId>> rows(static_cast<std::size_t>(n_users));
  parallel_for(n_users, [&](std::int64_t begin, std::int64_t end) {
    std::vector<double> user_cdf;
    for (std::int64_t u = begin; u < end; ++u) {
      CounterRng rng(seed, kSampleStream, static_cast<std::uint64_t>(u));
      const Index n_u = rng.uniform_int(p.min_items, p.max_items);
      const std::vector<double>* prior = &pi_cdf;
      if (p.user_prior == PlantedModel::UserPrior::kDirichlet) {
        Eigen::VectorXd theta(k);
        for (Index c = 0; c < k; ++c) {
          theta(c) = rng.gamma(std::max(1e-12, p.dirichlet_alpha * static_cast<double>(k) *
                                                   p.pi_true(c)));
        }
        user_cdf = cumulative(theta);
        prior = &user_cdf;
      }
      Index h = rng.categorical(*prior);
      auto& row = rows[static_cast<std::size_t>(u)];
      row.reserve(static_cast<std::size_t>(n_u));
      const Index cap = 100 * n_u;
      for (Index attempt = 0; attempt < cap && static_cast<Index>(row.size()) < n_u; ++attempt) {
        if (p.latent_draw == PlantedModel::LatentDraw::kPerItem) h = rng.categorical(*prior);
        const auto y = static_cast<ItemId>(rng.categorical(item_cdf[static_cast<std::size_t>(h)]));
        if (std::find(row.begin(), row.end(), y) == row.end()) row.push_back(y);
      }
    }
  });
  return InteractionMatrix::from_rows(d, std::move(rows));
}

Eigen::VectorXd population_m1(const PlantedModel& p) { return p.o_true * p.pi_true; }

PairwiseMoment population_m2(const PlantedModel& p) {
  const Eigen::MatrixXd dense = p.o_true * p.pi_true.asDiagonal() * p.o_true.transpose();
  PairwiseMoment m2;
  m2.dim = p.d();
  m2.include_diagonal = true;
  m2.entries = dense.sparseView(0.0, 0.0);
  m2.entries.makeCompressed();
  return m2;
}

WhitenedTriple population_whitened_m3(const PlantedModel& p, const Eigen::MatrixXd& w) {
  if (w.rows() != p.d()) throw Error(ErrorKind::kDimensionMismatch, "W rows != D");
  WhitenedTriple t(w.cols());
  for (Index c = 0; c < p.k(); ++c) {
    const Eigen::VectorXd wm = w.transpose() * p.o_true.col(c);
    t.add_rank_one(p.pi_true(c), wm);
  }
  return t;
}

std::vector<Index> align_columns(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "cannot align models of different shape");
  }
  const Index k = truth.cols();
  Eigen::MatrixXd cosine(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      const double denom = truth.col(i).norm() * estimate.col(j).norm();
      cosine(i, j) = denom > 0.0 ? truth.col(i).dot(estimate.col(j)) / denom : 0.0;
    }
  }
  std::vector<Index> perm(static_cast<std::size_t>(k), -1);
  if (k <= 10) {
    // dp over the set of used estimate columns; truth column = popcount(mask)
    const std::size_t states = std::size_t{1} << k;
    std::vector<double> best(states, -std::numeric_limits<double>::infinity());
    std::vector<int> choice(states, -1);
    best[0] = 0.0;
    for (std::size_t mask = 0; mask < states; ++mask) {
      if (best[mask] == -std::numeric_limits<double>::infinity()) continue;
      const auto row = static_cast<Index>(__builtin_popcountll(mask));
      if (row == k) continue;
      for (Index j = 0; j < k; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const std::size_t next = mask | (std::size_t{1} << j);
        const double score = best[mask] + cosine(row, j);
        if (score > best[next]) {
          best[next] = score;
          choice[next] = static_cast<int>(j);
        }
      }
    }
    std::size_t mask = states - 1;
    for (Index row = k - 1; row >= 0; --row) {
      const int j = choice[mask];
      perm[static_cast<std::size_t>(row)] = j;
      mask &= ~(std::size_t{1} << j);
    }
    return perm;
  }
  std::vector<std::tuple<double, Index, Index>> cand;
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) cand.emplace_back(-cosine(i, j), i, j);
  }
  std::sort(cand.begin(), cand.end());
  std::vector<char> used(static_cast<std::size_t>(k), 0);
  for (const auto& [neg, i, j] : cand) {
    if (perm[static_cast<std::size_t>(i)] >= 0 || used[static_cast<std::size_t>(j)]) continue;
    perm[static_cast<std::size_t>(i)] = j;
    used[static_cast<std::size_t>(j)] = 1;
  }
  return perm;
}

RecoveryReport align_and_error(const PlantedModel& truth, const MomModel& est) {
  if (truth.d() != est.d() || truth.k() != est.k()) {
    throw Error(ErrorKind::kDimensionMismatch, "planted and estimated models differ in shape");
  }
  RecoveryReport r;
  r.perm = align_columns(truth.o_true, est.o);
  const Index k = truth.k();
  r.mu_errors.resize(k);
  r.pi_errors.resize(k);
  for (Index c = 0; c < k; ++c) {
    const Index j = r.perm[static_cast<std::size_t>(c)];
    r.mu_errors(c) = (truth.o_true.col(c) - est.o.col(j)).norm();
    r.pi_errors(c) = std::abs(truth.pi_true(c) - est.pi(j));
  }
  r.max_mu_error = r.mu_errors.maxCoeff();
  r.max_pi_error = r.pi_errors.maxCoeff();
  return r;
}

}  // namespace speccf
