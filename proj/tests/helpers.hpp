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


#ifndef SPECCF_TESTS_HELPERS_HPP
#define SPECCF_TESTS_HELPERS_HPP

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "speccf/data.hpp"
#include "speccf/rng.hpp"

namespace speccf::testing {

/// Random binary matrix; each user gets between min_nnz and max_nnz items.
inline InteractionMatrix random_matrix(CounterRng& rng, Index n_users, Index n_items,
                                       Index min_nnz, Index max_nnz) {
  std::vector<std::vector<ItemId>> rows(static_cast<std::size_t>(n_users));
  for (auto& row : rows) {
    const Index n = rng.uniform_int(min_nnz, std::min(max_nnz, n_items));
    std::vector<ItemId> all(static_cast<std::size_t>(n_items));
    for (Index i = 0; i < n_items; ++i) all[static_cast<std::size_t>(i)] = static_cast<ItemId>(i);
    for (Index i = 0; i < n; ++i) {
      std::swap(all[static_cast<std::size_t>(i)],
                all[static_cast<std::size_t>(rng.uniform_int(i, n_items - 1))]);
    }
    row.assign(all.begin(), all.begin() + n);
  }
  return InteractionMatrix::from_rows(n_items, std::move(rows));
}

inline Eigen::MatrixXd random_matrix_normal(CounterRng& rng, Index rows, Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

/// Column-orthonormal rows x cols matrix.
inline Eigen::MatrixXd random_orthonormal(CounterRng& rng, Index rows, Index cols) {
  Eigen::MatrixXd q = random_matrix_normal(rng, rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    }
    q.col(j).normalize();
  }
  return q;
}

}  // namespace speccf::testing

#endif  // SPECCF_TESTS_HELPERS_HPP
