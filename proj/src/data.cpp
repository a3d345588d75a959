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

#include "speccf/data.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "speccf/error.hpp"

namespace speccf {

InteractionMatrix InteractionMatrix::from_rows(Index n_items,
                                               std::vector<std::vector<ItemId>> rows) {
  if (n_items < 0) throw Error(ErrorKind::kInvalidArgument, "n_items must be nonnegative");
  std::vector<std::int64_t> offsets;
  offsets.reserve(rows.size() + 1);
  offsets.push_back(0);
  std::vector<ItemId> ids;
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (!r.empty() && (r.front() < 0 || r.back() >= n_items)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "item id out of range [0, " + std::to_string(n_items) + ")");
    }
    ids.insert(ids.end(), r.begin(), r.end());
    offsets.push_back(static_cast<std::int64_t>(ids.size()));
  }
  return from_csr(n_items, std::move(offsets), std::move(ids));
}

InteractionMatrix InteractionMatrix::from_csr(Index n_items,
                                              std::vector<std::int64_t> row_offsets,
                                              std::vector<ItemId> item_ids) {
  if (row_offsets.empty() || row_offsets.front() != 0 ||
      row_offsets.back() != static_cast<std::int64_t>(item_ids.size())) {
    throw Error(ErrorKind::kInvalidArgument, "inconsistent row offsets");
  }
  InteractionMatrix m;
  m.n_items_ = n_items;
  m.row_offsets_ = std::move(row_offsets);
  m.item_ids_ = std::move(item_ids);
  return m;
}

InteractionMatrix::InteractionMatrix(const InteractionMatrix& other)
    : n_items_(other.n_items_),
      row_offsets_(other.row_offsets_),
      item_ids_(other.item_ids_),
      passes_(other.pass_count()) {}

InteractionMatrix::InteractionMatrix(InteractionMatrix&& other) noexcept
    : n_items_(other.n_items_),
      row_offsets_(std::move(other.row_offsets_)),
      item_ids_(std::move(other.item_ids_)),
      passes_(other.pass_count()) {
  other.row_offsets_ = {0};
}

InteractionMatrix& InteractionMatrix::operator=(const InteractionMatrix& other) {
  if (this != &other) {
    n_items_ = other.n_items_;
    row_offsets_ = other.row_offsets_;
    item_ids_ = other.item_ids_;
    passes_.store(other.pass_count());
  }
  return *this;
}

InteractionMatrix& InteractionMatrix::operator=(InteractionMatrix&& other) noexcept {
  if (this != &other) {
    n_items_ = other.n_items_;
    row_offsets_ = std::move(other.row_offsets_);
    item_ids_ = std::move(other.item_ids_);
    passes_.store(other.pass_count());
    other.row_offsets_ = {0};
  }
  return *this;
}

Index InteractionMatrix::empty_rows() const {
  Index count = 0;
  for (std::size_t u = 0; u + 1 < row_offsets_.size(); ++u) {
    if (row_offsets_[u] == row_offsets_[u + 1]) ++count;
  }
  return count;
}

Eigen::MatrixXd InteractionMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n_users(), n_items_);
  for (Index u = 0; u < n_users(); ++u) {
    for (ItemId d : row(u)) dense(u, d) = 1.0;
  }
  return dense;
}

DatasetStats compute_stats(const InteractionMatrix& x) {
  if (x.n_users() < 1) throw Error(ErrorKind::kEmptyInput, "matrix has no users");
  DatasetStats s;
  s.n_users = x.n_users();
  for (Index u = 0; u < x.n_users(); ++u) {
    const auto n = static_cast<std::uint64_t>(x.row_nnz(u));
    if (n == 0) ++s.empty_rows;
    s.sum_nnz += n;
    s.sum_nnz2 += n * n;
    s.sum_nnz3 += n * n * n;
  }
  if (s.sum_nnz == 0) {
    throw Error(ErrorKind::kEmptyInput, "all rows are empty; moments are undefined");
  }
  const auto n = static_cast<double>(s.n_users);
  s.d1s = static_cast<double>(s.sum_nnz) / n;
  s.d2s = static_cast<double>(s.sum_nnz2) / n;
  s.d3s = static_cast<double>(s.sum_nnz3) / n;
  return s;
}

Index KeyIndex::intern(std::string_view key) {
  auto [it, inserted] = index_.try_emplace(std::string(key), size());
  if (inserted) keys_.emplace_back(key);
  return it->second;
}

std::optional<Index> KeyIndex::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Returns the requested field or nullopt when the line has too few fields.
std::optional<std::string_view> field(std::string_view line, char delim, int column) {
  int col = 0;
  std::size_t start = 0;
  for (;;) {
    const auto end = line.find(delim, start);
    if (col == column) {
      return trim(line.substr(start, end == std::string_view::npos ? end : end - start));
    }
    if (end == std::string_view::npos) return std::nullopt;
    start = end + 1;
    ++col;
  }
}

/// Walks records, calling fn(user_key, item_key). Returns the record count.
template <typename Fn>
std::int64_t scan_records(std::istream& in, const TripletSchema& schema, Fn&& fn) {
  if (schema.user_column < 0 || schema.item_column < 0) {
    throw Error(ErrorKind::kInvalidArgument, "column indices must be nonnegative");
  }
  std::string line;
  std::int64_t line_no = 0;
  std::int64_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (trim(view).empty() || view.front() == '#') continue;
    char delim = schema.delimiter;
    if (delim == 0) delim = view.find('\t') != std::string_view::npos ? '\t' : ',';
    const auto user = field(view, delim, schema.user_column);
    const auto item = field(view, delim, schema.item_column);
    if (!user || !item || user->empty() || item->empty()) {
      throw Error(ErrorKind::kParse,
                  "malformed record at line " + std::to_string(line_no) +
                      ": expected user column " + std::to_string(schema.user_column) +
                      " and item column " + std::to_string(schema.item_column),
                  line_no);
    }
    fn(*user, *item);
    ++records;
  }
  return records;
}

}  // namespace

Dataset load_triplets(std::istream& in, const TripletSchema& schema) {
  Dataset ds;
  std::vector<std::vector<ItemId>> rows;
  const auto records = scan_records(in, schema, [&](std::string_view u, std::string_view i) {
    const Index user = ds.users.intern(u);
    const Index item = ds.items.intern(i);
    if (user >= static_cast<Index>(rows.size())) rows.resize(static_cast<std::size_t>(user) + 1);
    rows[static_cast<std::size_t>(user)].push_back(static_cast<ItemId>(item));
  });
  if (records == 0) throw Error(ErrorKind::kEmptyInput, "input contains no interactions");
  ds.matrix = InteractionMatrix::from_rows(ds.items.size(), std::move(rows));
  return ds;
}

Dataset load_triplets_file(const std::string& path, const TripletSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return load_triplets(in, schema);
}

AlignedInteractions load_aligned_triplets(std::istream& in, const KeyIndex& users,
                                          const KeyIndex& items,
                                          const TripletSchema& schema) {
  AlignedInteractions out;
  out.rows.resize(static_cast<std::size_t>(users.size()));
  scan_records(in, schema, [&](std::string_view u, std::string_view i) {
    const auto user = users.find(u);
    if (!user) {
      ++out.dropped_unknown_user;
      return;
    }
    const auto item = items.find(i);
    if (!item) {
      ++out.dropped_unknown_item;
      return;
    }
    out.rows[static_cast<std::size_t>(*user)].push_back(static_cast<ItemId>(*item));
  });
  for (auto& r : out.rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return out;
}

void write_triplets(std::ostream& out, const InteractionMatrix& x, const KeyIndex* users,
                    const KeyIndex* items) {
  for (Index u = 0; u < x.n_users(); ++u) {
    for (ItemId d : x.row(u)) {
      if (users) {
        out << users->key(u);
      } else {
        out << 'u' << u;
      }
      out << '\t';
      if (items) {
        out << items->key(d);
      } else {
        out << 'i' << d;
      }
      out << '\n';
    }
  }
}

}  // namespace speccf
