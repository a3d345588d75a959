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

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "helpers.hpp"
#include "speccf/error.hpp"
#include "speccf/synth.hpp"
#include "speccf/whitening.hpp"

using namespace speccf;

namespace {

PairwiseMoment from_dense(const Eigen::MatrixXd& a) {
  PairwiseMoment m;
  m.dim = a.rows();
  m.entries = a.sparseView(0.0, 0.0);
  m.entries.makeCompressed();
  return m;
}

Eigen::MatrixXd random_psd(CounterRng& rng, Index n) {
  const Eigen::MatrixXd g = testing::random_matrix_normal(rng, n, n);
  return g * g.transpose() / static_cast<double>(n);
}

}  // namespace

TEST_CASE("diagonal matrix") {
  Eigen::MatrixXd a = Eigen::Vector3d(0.5, 0.3, 0.2).asDiagonal();
  const auto eig = topk_eig(from_dense(a), 2);
  CHECK(eig.values(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eig.values(1) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK((eig.vectors.col(0) - Eigen::Vector3d::UnitX()).norm() <= 1e-12);
  CHECK((eig.vectors.col(1) - Eigen::Vector3d::UnitY()).norm() <= 1e-12);
  CHECK(eig.converged);
}

TEST_CASE("rank-one outer product") {
  Eigen::Matrix2d a;
  a << 0.36, 0.48, 0.48, 0.64;
  const auto eig = topk_eig(from_dense(a), 1);
  CHECK(eig.values(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eig.vectors(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(eig.vectors(1, 0) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("matches a dense eigendecomposition") {
  CounterRng rng(21, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = random_psd(rng, 20);
    const auto eig = topk_eig(from_dense(a), 5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(a);
    const Eigen::VectorXd expected = oracle.eigenvalues().reverse().head(5);
    CHECK((eig.values - expected).cwiseAbs().maxCoeff() <= 1e-8);
    for (Index c = 0; c < 5; ++c) {
      CHECK((a * eig.vectors.col(c) - eig.values(c) * eig.vectors.col(c)).norm() <=
            1e-10 * eig.values(0) * 1.0001);
    }
    const Eigen::MatrixXd gram = eig.vectors.transpose() * eig.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("large sparse matrix beyond the basis size") {
  CounterRng rng(22, 3);
  const auto x = testing::random_matrix(rng, 3000, 400, 2, 12);
  const auto m2 = estimate_m2(x);
  const auto eig = topk_eig(m2, 8);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle((Eigen::MatrixXd(m2.entries)));
  const Eigen::VectorXd expected = oracle.eigenvalues().reverse().head(8);
  CHECK((eig.values - expected).cwiseAbs().maxCoeff() <= 1e-8 * expected(0));
  CHECK(eig.residuals.maxCoeff() <= 1e-10 * eig.values(0));
}

TEST_CASE("signs are canonical and the solve is deterministic") {
  CounterRng rng(23, 3);
  const Eigen::MatrixXd a = random_psd(rng, 15);
  const auto e1 = topk_eig(from_dense(a), 4);
  const auto e2 = topk_eig(from_dense(a), 4);
  CHECK(e1.vectors == e2.vectors);
  for (Index c = 0; c < 4; ++c) {
    Index arg = 0;
    e1.vectors.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(e1.vectors(arg, c) > 0.0);
  }
}

TEST_CASE("rank deficiency names the achieved rank") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 0) = 1.0;
  a(1, 1) = 0.5;
  try {
    topk_eig(from_dense(a), 3);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRankDeficient);
    CHECK(e.detail() == 2);
    CHECK(std::string(e.what()).find("rank 2") != std::string::npos);
  }
  CHECK_THROWS_AS(topk_eig(from_dense(a), 5), Error);
  CHECK_THROWS_AS(topk_eig(from_dense(a), 0), Error);
}

TEST_CASE("whitener examples") {
  SUBCASE("unit eigenvalue") {
    const auto wt = build_whitener(Eigen::VectorXd::Ones(1), Eigen::Vector2d(0.6, 0.8));
    CHECK((wt.w - Eigen::Vector2d(0.6, 0.8)).norm() <= 1e-15);
    CHECK((wt.w_pinv - Eigen::Vector2d(0.6, 0.8)).norm() <= 1e-15);
  }
  SUBCASE("eigenvalue four") {
    const auto wt = build_whitener(Eigen::VectorXd::Constant(1, 4.0), Eigen::Vector2d(1.0, 0.0));
    CHECK(wt.w(0, 0) == 0.5);
    CHECK(wt.w(1, 0) == 0.0);
    CHECK(wt.w_pinv(0, 0) == 2.0);
  }
  SUBCASE("identity spectrum") {
    CounterRng rng(24, 3);
    const Eigen::MatrixXd omega = testing::random_orthonormal(rng, 6, 3);
    const auto wt = build_whitener(Eigen::VectorXd::Ones(3), omega);
    CHECK(wt.w == omega);
    CHECK(wt.w_pinv == omega);
  }
  SUBCASE("non-positive eigenvalue") {
    CHECK_THROWS_AS(build_whitener(Eigen::Vector2d(1.0, 0.0), Eigen::MatrixXd::Identity(2, 2)),
                    Error);
    CHECK_THROWS_AS(build_whitener(Eigen::Vector2d(1.0, -0.1), Eigen::MatrixXd::Identity(2, 2)),
                    Error);
  }
}

TEST_CASE("whitening identities and spectral norms") {
  CounterRng rng(25, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = random_psd(rng, 12);
    const auto wt = build_whitener(topk_eig(from_dense(a), 4));
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    CHECK((wt.w.transpose() * a * wt.w - eye).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((wt.w_pinv.transpose() * wt.w - eye).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((wt.eigvecs.transpose() * wt.eigvecs - eye).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::JacobiSVD<Eigen::MatrixXd> sw(wt.w), sp(wt.w_pinv);
    CHECK(sw.singularValues()(0) == doctest::Approx(1.0 / std::sqrt(wt.eigvals(3))).epsilon(1e-8));
    CHECK(sp.singularValues()(0) == doctest::Approx(std::sqrt(wt.eigvals(0))).epsilon(1e-8));
  }
}

TEST_CASE("whitened planted components are orthonormal") {
  const PlantedModel p = random_planted(3, 20, 5);
  const auto m2 = population_m2(p);
  const auto wt = build_whitener(topk_eig(m2, 3));
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  for (Index c = 0; c < 3; ++c) {
    const Eigen::VectorXd u = std::sqrt(p.pi_true(c)) * wt.w.transpose() * p.o_true.col(c);
    s += u * u.transpose();
  }
  CHECK((s - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-6);
}
