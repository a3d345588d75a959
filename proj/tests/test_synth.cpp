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

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "speccf/error.hpp"
#include "speccf/moments.hpp"
#include "speccf/synth.hpp"

using namespace speccf;

namespace {

PlantedModel single(const Eigen::VectorXd& column, Index n_u) {
  PlantedModel p;
  p.o_true = column;
  p.pi_true = Eigen::VectorXd::Ones(1);
  p.min_items = n_u;
  p.max_items = n_u;
  return p;
}

}  // namespace

TEST_CASE("two-item support forces both items") {
  const auto x = sample_dataset(single(Eigen::Vector2d(0.5, 0.5), 2), 50, 1);
  for (Index u = 0; u < x.n_users(); ++u) {
    REQUIRE(x.row_nnz(u) == 2);
    CHECK(x.row(u)[0] == 0);
    CHECK(x.row(u)[1] == 1);
  }
}

TEST_CASE("point-mass component gives a point-mass marginal") {
  const auto x = sample_dataset(single(Eigen::Vector3d(1, 0, 0), 1), 40, 2);
  for (Index u = 0; u < x.n_users(); ++u) CHECK(x.row(u)[0] == 0);
  const Eigen::VectorXd m1 = estimate_m1(x);
  CHECK(m1(0) == 1.0);
  CHECK(m1(1) == 0.0);
}

TEST_CASE("resampling gives up after the attempt cap") {
  // only one item has mass, but two distinct items are requested
  const auto x = sample_dataset(single(Eigen::Vector3d(1, 0, 0), 2), 10, 3);
  for (Index u = 0; u < x.n_users(); ++u) CHECK(x.row_nnz(u) == 1);
}

TEST_CASE("n_u above D is an error") {
  PlantedModel p = single(Eigen::Vector2d(0.5, 0.5), 3);
  CHECK_THROWS_AS(sample_dataset(p, 10, 1), Error);
  p.min_items = 0;
  CHECK_THROWS_AS(sample_dataset(p, 10, 1), Error);
  CHECK_THROWS_AS(sample_dataset(single(Eigen::Vector2d(0.5, 0.5), 1), 0, 1), Error);
}

TEST_CASE("every user gets n_u distinct items in range") {
  const PlantedModel p = random_planted(4, 60, 5);
  const auto x = sample_dataset(p, 2000, 7);
  for (Index u = 0; u < x.n_users(); ++u) {
    CHECK(x.row_nnz(u) >= p.min_items);
    CHECK(x.row_nnz(u) <= p.max_items);
  }
}

TEST_CASE("per-user latent draw matches the item marginal") {
  // one latent draw per user: with n_u = 1 the item frequency is sum_k pi_k mu_k
  PlantedModel p = random_planted(2, 10, 9, 1.0, 1.0);
  p.min_items = 1;
  p.max_items = 1;
  const Index n = 10000;
  const auto x = sample_dataset(p, n, 11);
  const Eigen::VectorXd m1 = estimate_m1(x);
  const Eigen::VectorXd expected = population_m1(p);
  for (Index i = 0; i < 10; ++i) {
    const double sd = std::sqrt(expected(i) * (1.0 - expected(i)) / static_cast<double>(n));
    CHECK(std::abs(m1(i) - expected(i)) <= 3.0 * sd + 1e-12);
  }
}

TEST_CASE("per-item latent draws and Dirichlet user priors are available") {
  PlantedModel p = random_planted(3, 30, 12);
  p.latent_draw = PlantedModel::LatentDraw::kPerItem;
  CHECK(sample_dataset(p, 100, 1).nnz() > 0);
  p.latent_draw = PlantedModel::LatentDraw::kPerUser;
  p.user_prior = PlantedModel::UserPrior::kDirichlet;
  p.dirichlet_alpha = 0.5;
  CHECK(sample_dataset(p, 100, 1).nnz() > 0);
}

TEST_CASE("sampling is deterministic and independent of the worker count") {
  const PlantedModel p = random_planted(3, 40, 13);
  setenv("SPECCF_THREADS", "1", 1);
  const auto a = sample_dataset(p, 3000, 99);
  setenv("SPECCF_THREADS", "4", 1);
  const auto b = sample_dataset(p, 3000, 99);
  unsetenv("SPECCF_THREADS");
  CHECK(a.item_ids() == b.item_ids());
  CHECK(a.row_offsets() == b.row_offsets());
  const auto c = sample_dataset(p, 3000, 100);
  CHECK(a.item_ids() != c.item_ids());
}

TEST_CASE("planted models are column-stochastic") {
  for (const PlantedModel& p : {random_planted(5, 40, 1), separable_planted(5, 40, 1),
                                separable_planted(4, 41, 2, 0.7)}) {
    CHECK((p.o_true.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(p.o_true.minCoeff() >= 0.0);
    CHECK(std::abs(p.pi_true.sum() - 1.0) <= 1e-12);
  }
  const PlantedModel s = separable_planted(3, 9, 1);
  CHECK(s.o_true(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(s.o_true(3, 0) == 0.0);
  CHECK(s.o_true(3, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("population moments have the planted form") {
  const PlantedModel p = random_planted(3, 12, 4);
  const Eigen::MatrixXd m2(population_m2(p).entries);
  CHECK(m2.sum() == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(12, 2);
  const auto t = population_whitened_m3(p, w);
  double direct = 0.0;
  for (Index c = 0; c < 3; ++c) direct += p.pi_true(c) * p.o_true(0, c) * p.o_true(1, c) * p.o_true(1, c);
  CHECK(t(0, 1, 1) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("alignment examples") {
  const PlantedModel p = random_planted(2, 8, 21);
  SUBCASE("identity") {
    const auto r = align_and_error(p, p.as_model());
    CHECK(r.perm == std::vector<Index>{0, 1});
    CHECK(r.max_mu_error == 0.0);
    CHECK(r.max_pi_error == 0.0);
  }
  SUBCASE("swapped columns") {
    MomModel m = p.as_model();
    m.o.col(0).swap(m.o.col(1));
    std::swap(m.pi(0), m.pi(1));
    const auto r = align_and_error(p, m);
    CHECK(r.perm == std::vector<Index>{1, 0});
    CHECK(r.max_mu_error == 0.0);
    CHECK(r.max_pi_error == 0.0);
  }
  SUBCASE("perturbed column") {
    MomModel m = p.as_model();
    m.o(0, 1) += 0.01;
    m.o.col(1) /= m.o.col(1).sum();
    const auto r = align_and_error(p, m);
    CHECK(r.max_mu_error == (p.o_true.col(1) - m.o.col(1)).norm());
  }
  SUBCASE("shape mismatch") {
    MomModel m = p.as_model();
    m.o.conservativeResize(7, Eigen::NoChange);
    CHECK_THROWS_AS(align_and_error(p, m), Error);
  }
}

TEST_CASE("alignment is a bijection, also greedily for large K") {
  for (Index k : {4, 12}) {
    const PlantedModel p = random_planted(k, 50, 30 + static_cast<std::uint64_t>(k));
    Eigen::MatrixXd shuffled(50, k);
    for (Index c = 0; c < k; ++c) shuffled.col(c) = p.o_true.col((c * 5 + 3) % k);
    const auto perm = align_columns(p.o_true, shuffled);
    std::vector<char> used(static_cast<std::size_t>(k), 0);
    for (Index c = 0; c < k; ++c) {
      const Index j = perm[static_cast<std::size_t>(c)];
      CHECK_FALSE(used[static_cast<std::size_t>(j)]);
      used[static_cast<std::size_t>(j)] = 1;
      CHECK((shuffled.col(j) - p.o_true.col(c)).norm() == 0.0);
    }
  }
}
