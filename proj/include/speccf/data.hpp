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

#ifndef SPECCF_DATA_HPP
#define SPECCF_DATA_HPP

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace speccf {

using Index = Eigen::Index;
using ItemId = std::int32_t;

/// Sparse binary user x item matrix in compressed-row form.
///
/// Rows hold strictly increasing item ids. The matrix is immutable once
/// built; the only mutable member is the pass counter, which records how
/// many complete row scans have been made through `for_each_row`.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;

  /// Builds from per-user item lists. Each list is sorted and deduplicated.
  /// Throws kInvalidArgument if any id falls outside [0, n_items).
  static InteractionMatrix from_rows(Index n_items,
                                     std::vector<std::vector<ItemId>> rows);

  /// Builds from already-validated CSR arrays.
  static InteractionMatrix from_csr(Index n_items,
                                    std::vector<std::int64_t> row_offsets,
                                    std::vector<ItemId> item_ids);

  InteractionMatrix(const InteractionMatrix& other);
  InteractionMatrix(InteractionMatrix&& other) noexcept;
  InteractionMatrix& operator=(const InteractionMatrix& other);
  InteractionMatrix& operator=(InteractionMatrix&& other) noexcept;

  Index n_users() const { return static_cast<Index>(row_offsets_.size()) - 1; }
  Index n_items() const { return n_items_; }
  std::int64_t nnz() const { return row_offsets_.back(); }

  std::span<const ItemId> row(Index user) const {
    const auto b = static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(user)]);
    const auto e = static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(user) + 1]);
    return {item_ids_.data() + b, e - b};
  }
  Index row_nnz(Index user) const {
    return static_cast<Index>(row_offsets_[static_cast<std::size_t>(user) + 1] -
                              row_offsets_[static_cast<std::size_t>(user)]);
  }

  const std::vector<std::int64_t>& row_offsets() const { return row_offsets_; }
  const std::vector<ItemId>& item_ids() const { return item_ids_; }

  /// Number of rows with no items. Such rows are legal but carry no signal.
  Index empty_rows() const;

  /// Visits every row in order as fn(user, items) and counts one pass.
  template <typename Fn>
  void for_each_row(Fn&& fn) const {
    const Index n = n_users();
    for (Index u = 0; u < n; ++u) fn(u, row(u));
    passes_.fetch_add(1, std::memory_order_relaxed);
  }

  /// Records a pass made by a caller that scanned rows itself (for example
  /// a partitioned parallel scan that covered every row exactly once).
  void count_pass() const { passes_.fetch_add(1, std::memory_order_relaxed); }

  std::uint64_t pass_count() const { return passes_.load(std::memory_order_relaxed); }
  void reset_pass_count() const { passes_.store(0, std::memory_order_relaxed); }

  Eigen::MatrixXd to_dense() const;

 private:
  Index n_items_ = 0;
  std::vector<std::int64_t> row_offsets_{0};
  std::vector<ItemId> item_ids_;
  mutable std::atomic<std::uint64_t> passes_{0};
};

struct DatasetStats {
  double d1s = 0.0;  // mean nnz per user
  double d2s = 0.0;  // mean nnz^2
  double d3s = 0.0;  // mean nnz^3
  std::uint64_t sum_nnz = 0;
  std::uint64_t sum_nnz2 = 0;
  std::uint64_t sum_nnz3 = 0;
  Index n_users = 0;
  Index empty_rows = 0;
};

/// Exact integer sums of nnz powers over rows. Uses only the row offsets,
/// so it does not count as a data pass. Throws kEmptyInput when every row
/// is empty.
DatasetStats compute_stats(const InteractionMatrix& x);

/// Bidirectional string key <-> dense index map in first-appearance order.
class KeyIndex {
 public:
  /// Returns the index for `key`, inserting it at the end if new.
  Index intern(std::string_view key);
  std::optional<Index> find(std::string_view key) const;
  const std::string& key(Index i) const { return keys_.at(static_cast<std::size_t>(i)); }
  Index size() const { return static_cast<Index>(keys_.size()); }
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::unordered_map<std::string, Index> index_;
  std::vector<std::string> keys_;
};

struct TripletSchema {
  int user_column = 0;
  int item_column = 1;
  /// '\t' or ','; 0 picks per line (tab if present, else comma).
  char delimiter = 0;
};

struct Dataset {
  InteractionMatrix matrix;
  KeyIndex users;
  KeyIndex items;
};

/// Reads one interaction per line. Lines starting with '#' and blank lines
/// are skipped; extra columns are ignored. Throws kParse naming the line on
/// a malformed record and kEmptyInput when no records were read.
Dataset load_triplets(std::istream& in, const TripletSchema& schema = {});
Dataset load_triplets_file(const std::string& path, const TripletSchema& schema = {});

/// Re-keys `in` against existing dictionaries: users and items not already
/// present are dropped and counted. Used to align held-out interactions
/// with a training set.
struct AlignedInteractions {
  std::vector<std::vector<ItemId>> rows;  // indexed by training user
  std::int64_t dropped_unknown_user = 0;
  std::int64_t dropped_unknown_item = 0;
};
AlignedInteractions load_aligned_triplets(std::istream& in, const KeyIndex& users,
                                          const KeyIndex& items,
                                          const TripletSchema& schema = {});

/// Writes "user<TAB>item" lines for every nonzero.
void write_triplets(std::ostream& out, const InteractionMatrix& x,
                    const KeyIndex* users = nullptr, const KeyIndex* items = nullptr);

}  // namespace speccf

#endif  // SPECCF_DATA_HPP
