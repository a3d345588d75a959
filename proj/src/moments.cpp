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

#include "speccf/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "speccf/error.hpp"
#include "speccf/parallel.hpp"

namespace speccf {

Eigen::VectorXd estimate_m1(const InteractionMatrix& x) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(x.n_items()), 0);
  std::uint64_t total = 0;
  x.for_each_row([&](Index, std::span<const ItemId> items) {
    for (ItemId d : items) ++counts[static_cast<std::size_t>(d)];
    total += items.size();
  });
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "all rows are empty");
  Eigen::VectorXd m1(x.n_items());
  for (Index d = 0; d < x.n_items(); ++d) {
    m1(d) = static_cast<double>(counts[static_cast<std::size_t>(d)]) / static_cast<double>(total);
  }
  return m1;
}

namespace {

/// Exact sparse pair counter. Pair keys are buffered, then sorted and
/// run-length merged into a sorted (key, count) table, which bounds memory
/// by the number of distinct pairs plus one buffer.
class PairCounter {
 public:
  static constexpr std::size_t kBufferLimit = std::size_t{1} << 22;

  static std::uint64_t key(ItemId row, ItemId col) {
    // column-major order so the merged table is already CSC-sorted
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(col)) << 32) |
           static_cast<std::uint32_t>(row);
  }

  void add(std::uint64_t k) {
    buffer_.push_back(k);
    if (buffer_.size() >= kBufferLimit) flush();
  }

  void flush() {
    if (buffer_.empty()) return;
    std::sort(buffer_.begin(), buffer_.end());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
    for (std::size_t i = 0; i < buffer_.size();) {
      std::size_t j = i;
      while (j < buffer_.size() && buffer_[j] == buffer_[i]) ++j;
      runs.emplace_back(buffer_[i], j - i);
      i = j;
    }
    buffer_.clear();
    if (table_.empty()) {
      table_ = std::move(runs);
      return;
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> merged;
    merged.reserve(table_.size() + runs.size());
    auto a = table_.begin();
    auto b = runs.begin();
    while (a != table_.end() || b != runs.end()) {
      if (b == runs.end() || (a != table_.end() && a->first < b->first)) {
        merged.push_back(*a++);
      } else if (a == table_.end() || b->first < a->first) {
        merged.push_back(*b++);
      } else {
        merged.emplace_back(a->first, a->second + b->second);
        ++a;
        ++b;
      }
    }
    table_ = std::move(merged);
  }

  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& table() {
    flush();
    return table_;
  }

 private:
  std::vector<std::uint64_t> buffer_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> table_;
};

}  // namespace

namespace {

constexpr Index kDenseCountLimit = 4096;

/// Small item spaces: upper-triangle counts in a dense table, then CSC.
PairwiseMoment dense_m2(const InteractionMatrix& x, bool include_diagonal) {
  const Index dim = x.n_items();
  const auto ud = static_cast<std::size_t>(dim);
  std::vector<std::uint32_t> counts(ud * ud, 0);
  std::uint64_t normalizer = 0;
  x.for_each_row([&](Index, std::span<const ItemId> items) {
    const auto n = static_cast<std::uint64_t>(items.size());
    normalizer += include_diagonal ? n * n : n * n - n;
    // rows are sorted and distinct
    for (std::size_t i = 0; i < items.size(); ++i) {
      std::uint32_t* base = counts.data() + static_cast<std::size_t>(items[i]) * ud;
      if (include_diagonal) ++base[static_cast<std::size_t>(items[i])];
      for (std::size_t j = i + 1; j < items.size(); ++j) ++base[static_cast<std::size_t>(items[j])];
    }
  });
  if (normalizer == 0) {
    throw Error(ErrorKind::kEmptyInput,
                include_diagonal ? "sum of nnz^2 is zero"
                                 : "no user has two or more items; off-diagonal moment is empty");
  }
  const auto at = [&](Index r, Index c) {
    return r <= c ? counts[static_cast<std::size_t>(r) * ud + static_cast<std::size_t>(c)]
                  : counts[static_cast<std::size_t>(c) * ud + static_cast<std::size_t>(r)];
  };
  std::int64_t nnz = 0;
  for (std::size_t e = 0; e < counts.size(); ++e) {
    if (counts[e] == 0) continue;
    nnz += (e / ud == e % ud) ? 1 : 2;
  }
  PairwiseMoment m2;
  m2.dim = dim;
  m2.include_diagonal = include_diagonal;
  m2.normalizer = normalizer;
  m2.entries.resize(dim, dim);
  m2.entries.resizeNonZeros(static_cast<Index>(nnz));
  int* outer = m2.entries.outerIndexPtr();
  int* inner = m2.entries.innerIndexPtr();
  double* values = m2.entries.valuePtr();
  const auto denom = static_cast<double>(normalizer);
  int e = 0;
  for (Index c = 0; c < dim; ++c) {
    outer[c] = e;
    for (Index r = 0; r < dim; ++r) {
      const std::uint32_t v = at(r, c);
      if (v == 0) continue;
      inner[e] = static_cast<int>(r);
      values[e] = static_cast<double>(v) / denom;
      ++e;
    }
  }
  outer[dim] = e;
  return m2;
}

}  // namespace

PairwiseMoment estimate_m2(const InteractionMatrix& x, bool include_diagonal) {
  const Index dim = x.n_items();
  if (dim > std::numeric_limits<int>::max()) {
    throw Error(ErrorKind::kInvalidArgument, "item dimension exceeds sparse index range");
  }
  if (dim <= kDenseCountLimit &&
      static_cast<std::uint64_t>(x.n_users()) < std::numeric_limits<std::uint32_t>::max()) {
    return dense_m2(x, include_diagonal);
  }
  return sparse_m2(x, include_diagonal);
}

PairwiseMoment sparse_m2(const InteractionMatrix& x, bool include_diagonal) {
  const Index dim = x.n_items();
  PairCounter counter;
  std::uint64_t normalizer = 0;
  x.for_each_row([&](Index, std::span<const ItemId> items) {
    const auto n = static_cast<std::uint64_t>(items.size());
    normalizer += include_diagonal ? n * n : n * n - n;
    for (ItemId a : items) {
      for (ItemId b : items) {
        if (!include_diagonal && a == b) continue;
        counter.add(PairCounter::key(a, b));
      }
    }
  });
  if (normalizer == 0) {
    throw Error(ErrorKind::kEmptyInput,
                include_diagonal ? "sum of nnz^2 is zero"
                                 : "no user has two or more items; off-diagonal moment is empty");
  }

  const auto& table = counter.table();
  if (table.size() > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw Error(ErrorKind::kInvalidArgument, "pairwise moment has too many nonzeros");
  }
  PairwiseMoment m2;
  m2.dim = dim;
  m2.include_diagonal = include_diagonal;
  m2.normalizer = normalizer;
  m2.entries.resize(dim, dim);
  m2.entries.resizeNonZeros(static_cast<Index>(table.size()));
  int* outer = m2.entries.outerIndexPtr();
  int* inner = m2.entries.innerIndexPtr();
  double* values = m2.entries.valuePtr();
  std::fill(outer, outer + dim + 1, 0);
  const auto denom = static_cast<double>(normalizer);
  for (std::size_t e = 0; e < table.size(); ++e) {
    const auto col = static_cast<int>(table[e].first >> 32);
    inner[e] = static_cast<int>(table[e].first & 0xffffffffULL);
    values[e] = static_cast<double>(table[e].second) / denom;
    ++outer[col + 1];
  }
  for (Index c = 0; c < dim; ++c) outer[c + 1] += outer[c];
  return m2;
}

namespace {

struct CompensatedCells {
  std::vector<double> sum;
  std::vector<double> comp;

  explicit CompensatedCells(std::size_t n) : sum(n, 0.0), comp(n, 0.0) {}

  // Neumaier summation
  void add(std::size_t c, double v) {
    const double s = sum[c];
    const double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      comp[c] += (s - t) + v;
    } else {
      comp[c] += (v - t) + s;
    }
    sum[c] = t;
  }
};

}  // namespace

WhitenedTriple estimate_whitened_m3(const InteractionMatrix& x, const Eigen::MatrixXd& w) {
  if (w.rows() != x.n_items()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "whitening matrix has " + std::to_string(w.rows()) + " rows but data has " +
                    std::to_string(x.n_items()) + " items");
  }
  const Index k = w.cols();
  if (k < 1 || k > w.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "whitening matrix must have 1 <= K <= D columns");
  }

  // Unique cells i <= j <= l in lexicographic order.
  const auto n_cells = static_cast<std::size_t>(k * (k + 1) * (k + 2) / 6);
  const Index n_users = x.n_users();
  const std::int64_t n_parts = std::min<std::int64_t>(64, std::max<Index>(n_users, 1));

  std::vector<CompensatedCells> parts(static_cast<std::size_t>(n_parts),
                                      CompensatedCells(n_cells));
  std::vector<std::uint64_t> part_nnz3(static_cast<std::size_t>(n_parts), 0);

  parallel_for(n_parts, [&](std::int64_t pb, std::int64_t pe) {
    Eigen::VectorXd z(k);
    for (std::int64_t p = pb; p < pe; ++p) {
      auto& acc = parts[static_cast<std::size_t>(p)];
      const Index ub = n_users * p / n_parts;
      const Index ue = n_users * (p + 1) / n_parts;
      for (Index u = ub; u < ue; ++u) {
        const auto items = x.row(u);
        if (items.empty()) continue;
        const auto n = static_cast<std::uint64_t>(items.size());
        part_nnz3[static_cast<std::size_t>(p)] += n * n * n;
        z.setZero();
        for (ItemId d : items) z += w.row(d).transpose();
        std::size_t c = 0;
        for (Index i = 0; i < k; ++i) {
          for (Index j = i; j < k; ++j) {
            const double zij = z(i) * z(j);
            for (Index l = j; l < k; ++l) acc.add(c++, zij * z(l));
          }
        }
      }
    }
  });
  x.count_pass();

  std::uint64_t sum_nnz3 = 0;
  for (auto v : part_nnz3) sum_nnz3 += v;
  if (sum_nnz3 == 0) throw Error(ErrorKind::kEmptyInput, "sum of nnz^3 is zero");

  CompensatedCells total(n_cells);
  for (const auto& part : parts) {
    for (std::size_t c = 0; c < n_cells; ++c) {
      total.add(c, part.sum[c]);
      total.add(c, part.comp[c]);
    }
  }

  WhitenedTriple m3(k);
  const auto denom = static_cast<double>(sum_nnz3);
  std::size_t c = 0;
  for (Index i = 0; i < k; ++i) {
    for (Index j = i; j < k; ++j) {
      for (Index l = j; l < k; ++l) {
        const double v = (total.sum[c] + total.comp[c]) / denom;
        ++c;
        m3(i, j, l) = m3(i, l, j) = m3(j, i, l) = m3(j, l, i) = m3(l, i, j) = m3(l, j, i) = v;
      }
    }
  }
  return m3;
}

}  // namespace speccf
