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

#ifndef SPECCF_MOMENTS_HPP
#define SPECCF_MOMENTS_HPP

#include <cstdint>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "speccf/data.hpp"
#include "speccf/tensor.hpp"

namespace speccf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Empirical pairwise co-occurrence probabilities. `entries` stores both
/// triangles; every entry is count / normalizer with integer count.
struct PairwiseMoment {
  Index dim = 0;
  SparseMatrix entries;
  bool include_diagonal = true;
  std::uint64_t normalizer = 0;  // sum nnz^2, or sum (nnz^2 - nnz) without diagonal
};

using WhitenedTriple = SymmetricTensor3<double>;

/// Column counts over sum nnz. One data pass.
Eigen::VectorXd estimate_m1(const InteractionMatrix& x);

/// X^T X / sum nnz(x_i)^2, accumulated as exact integer pair counts in a
/// single pass. With include_diagonal = false, self-pairs are dropped and
/// the normalizer becomes sum nnz(nnz - 1).
PairwiseMoment estimate_m2(const InteractionMatrix& x, bool include_diagonal = true);

/// The sort-merge counter behind estimate_m2; estimate_m2 switches to a
/// dense count table when D <= 4096. Both give identical results.
PairwiseMoment sparse_m2(const InteractionMatrix& x, bool include_diagonal = true);

/// sum_i (x_i W)^{(x)3} / sum nnz(x_i)^3 without forming the D^3 moment.
/// One data pass. Per-cell compensated summation over a fixed row
/// partition, so the result does not depend on the worker count.
WhitenedTriple estimate_whitened_m3(const InteractionMatrix& x, const Eigen::MatrixXd& w);

}  // namespace speccf

#endif  // SPECCF_MOMENTS_HPP
