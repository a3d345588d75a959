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


#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <vector>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "oracles.hpp"
#include "speccf/error.hpp"
#include "speccf/moments.hpp"
#include "speccf/synth.hpp"

using namespace speccf;
using namespace speccf::testing;

TEST_CASE("first moment examples") {
  const Eigen::VectorXd a = estimate_m1(InteractionMatrix::from_rows(3, {{0, 1}, {1, 2}}));
  CHECK(a(0) == 0.25);
  CHECK(a(1) == 0.5);
  CHECK(a(2) == 0.25);
  CHECK(estimate_m1(InteractionMatrix::from_rows(1, {{0}}))(0) == 1.0);
  const Eigen::VectorXd c = estimate_m1(InteractionMatrix::from_rows(2, {{0}, {1}}));
  CHECK(c(0) == 0.5);
  CHECK(c(1) == 0.5);
}

TEST_CASE("pairwise moment examples") {
  const auto m2 = estimate_m2(InteractionMatrix::from_rows(3, {{0, 1}, {1, 2}}));
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 1, 0, 1, 2, 1, 0, 1, 1;
  expected /= 8.0;
  CHECK(Eigen::MatrixXd(m2.entries) == expected);
  CHECK(m2.normalizer == 8);

  const auto single = estimate_m2(InteractionMatrix::from_rows(1, {{0}}));
  CHECK(Eigen::MatrixXd(single.entries)(0, 0) == 1.0);
}

TEST_CASE("pairwise moment without self-pairs") {
  const auto x = InteractionMatrix::from_rows(3, {{0, 1}, {1, 2}, {2}});
  const auto m2 = estimate_m2(x, false);
  CHECK_FALSE(m2.include_diagonal);
  CHECK(m2.normalizer == 4);
  const Eigen::MatrixXd dense(m2.entries);
  CHECK(dense.diagonal().isZero(0.0));
  CHECK(dense(0, 1) == 0.25);
  CHECK(dense.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_m2(InteractionMatrix::from_rows(2, {{0}, {1}}), false), Error);
}

TEST_CASE("pairwise moment equals the dense oracle bit for bit") {
  CounterRng rng(11, 2);
  for (int trial = 0; trial < 60; ++trial) {
    const Index d = 1 + trial % 7;
    const auto x = testing::random_matrix(rng, 1 + trial % 6, d, 1, d);
    for (bool diag : {true, false}) {
      if (!diag && compute_stats(x).sum_nnz2 == static_cast<std::uint64_t>(x.nnz())) continue;
      const auto m2 = estimate_m2(x, diag);
      const Eigen::MatrixXd got(m2.entries);
      CHECK(got == dense_m2_oracle(x, diag));
      CHECK(got == got.transpose());
      CHECK((got.array() >= 0.0).all());
      CHECK(got.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("dense and sort-merge pair counters agree") {
  CounterRng rng(12, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testing::random_matrix(rng, 200, 40, 1, 15);
    for (bool diag : {true, false}) {
      const auto a = estimate_m2(x, diag);
      const auto b = sparse_m2(x, diag);
      CHECK(Eigen::MatrixXd(a.entries) == Eigen::MatrixXd(b.entries));
      CHECK(a.entries.nonZeros() == b.entries.nonZeros());
      CHECK(a.normalizer == b.normalizer);
    }
  }
}

TEST_CASE("pairwise moment does not depend on row order") {
  CounterRng rng(13, 2);
  const auto x = testing::random_matrix(rng, 50, 9, 1, 6);
  std::vector<std::vector<ItemId>> rows;
  for (Index u = x.n_users() - 1; u >= 0; --u) rows.emplace_back(x.row(u).begin(), x.row(u).end());
  const auto reversed = InteractionMatrix::from_rows(x.n_items(), rows);
  CHECK(Eigen::MatrixXd(estimate_m2(x).entries) == Eigen::MatrixXd(estimate_m2(reversed).entries));
}

TEST_CASE("whitened third moment examples") {
  const Eigen::MatrixXd w1 = Eigen::MatrixXd::Ones(1, 1);
  CHECK(estimate_whitened_m3(InteractionMatrix::from_rows(1, {{0}}), w1)(0, 0, 0) == 1.0);
  const Eigen::MatrixXd w3 = Eigen::MatrixXd::Ones(3, 1);
  CHECK(estimate_whitened_m3(InteractionMatrix::from_rows(3, {{0, 1}, {1, 2}}), w3)(0, 0, 0) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("whitened third moment matches the dense oracle") {
  CounterRng rng(14, 2);
  for (int trial = 0; trial < 60; ++trial) {
    const Index d = 1 + trial % 5;
    const Index k = 1 + trial % std::min<Index>(3, d);
    const auto x = testing::random_matrix(rng, 1 + trial % 6, d, 1, d);
    const Eigen::MatrixXd w = testing::random_matrix_normal(rng, d, k);
    const auto got = estimate_whitened_m3(x, w);
    CHECK(max_abs_diff(got, dense_m3_oracle(x, w)) <= 1e-10);
    CHECK(got.max_asymmetry() <= 1e-12);
  }
}

TEST_CASE("whitened third moment rejects mismatched W") {
  const auto x = InteractionMatrix::from_rows(3, {{0, 1}});
  CHECK_THROWS_AS(estimate_whitened_m3(x, Eigen::MatrixXd::Ones(2, 1)), Error);
  CHECK_THROWS_AS(estimate_whitened_m3(x, Eigen::MatrixXd::Ones(3, 4)), Error);
}

TEST_CASE("whitened third moment does not depend on the worker count") {
  CounterRng rng(15, 2);
  const auto x = testing::random_matrix(rng, 500, 30, 1, 12);
  const Eigen::MatrixXd w = testing::random_matrix_normal(rng, 30, 4);
  setenv("SPECCF_THREADS", "1", 1);
  const auto one = estimate_whitened_m3(x, w);
  setenv("SPECCF_THREADS", "5", 1);
  const auto five = estimate_whitened_m3(x, w);
  unsetenv("SPECCF_THREADS");
  CHECK(one.values() == five.values());
}

TEST_CASE("each estimator makes exactly one pass") {
  const auto x = InteractionMatrix::from_rows(4, {{0, 1}, {2, 3}, {1, 2}});
  estimate_m2(x);
  CHECK(x.pass_count() == 1);
  estimate_whitened_m3(x, Eigen::MatrixXd::Ones(4, 2));
  CHECK(x.pass_count() == 2);
}

TEST_CASE("sample pairwise moment concentrates at the 1/sqrt(N) rate") {
  // Separable planted model with uniform blocks: the estimator's limit is
  // E[X^T X per user] / E[nnz^2], which is computed in closed form.
  const Index k = 3, d = 30;
  const PlantedModel p = separable_planted(k, d, 1);
  Eigen::MatrixXd limit = Eigen::MatrixXd::Zero(d, d);
  double e_n2 = 0.0;
  for (Index n = p.min_items; n <= p.max_items; ++n) {
    const double pn = 1.0 / static_cast<double>(p.max_items - p.min_items + 1);
    e_n2 += pn * static_cast<double>(n * n);
    for (Index c = 0; c < k; ++c) {
      const Index b = d * c / k, e = d * (c + 1) / k, len = e - b;
      const double nd = static_cast<double>(n), ld = static_cast<double>(len);
      for (Index i = b; i < e; ++i) {
        for (Index j = b; j < e; ++j) {
          const double pij = i == j ? nd / ld : nd * (nd - 1.0) / (ld * (ld - 1.0));
          limit(i, j) += pn * p.pi_true(c) * pij;
        }
      }
    }
  }
  limit /= e_n2;

  std::vector<double> small, large;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto xs = sample_dataset(p, 2000, 100 + seed);
    const auto xl = sample_dataset(p, 8000, 200 + seed);
    small.push_back((Eigen::MatrixXd(estimate_m2(xs).entries) - limit).norm());
    large.push_back((Eigen::MatrixXd(estimate_m2(xl).entries) - limit).norm());
  }
  std::nth_element(small.begin(), small.begin() + 10, small.end());
  std::nth_element(large.begin(), large.begin() + 10, large.end());
  const double ratio = large[10] / small[10];
  CHECK(ratio >= 0.25);
  CHECK(ratio <= 1.0);
}
