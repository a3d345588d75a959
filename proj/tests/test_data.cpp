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

#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "speccf/data.hpp"
#include "speccf/error.hpp"

using namespace speccf;

namespace {

std::vector<ItemId> row_vec(const InteractionMatrix& x, Index u) {
  auto r = x.row(u);
  return {r.begin(), r.end()};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("triplets are re-indexed in first-appearance order") {
  std::istringstream in("uA\ti1\nuA\ti2\nuB\ti2\n");
  const Dataset ds = load_triplets(in);
  CHECK(ds.matrix.n_users() == 2);
  CHECK(ds.matrix.n_items() == 2);
  CHECK(row_vec(ds.matrix, 0) == std::vector<ItemId>{0, 1});
  CHECK(row_vec(ds.matrix, 1) == std::vector<ItemId>{1});
  CHECK(ds.users.key(1) == "uB");
  CHECK(ds.items.key(0) == "i1");
}

TEST_CASE("duplicate interactions collapse") {
  std::istringstream in("uA,i1\nuA,i1\n");
  const Dataset ds = load_triplets(in);
  CHECK(ds.matrix.n_users() == 1);
  CHECK(ds.matrix.n_items() == 1);
  CHECK(ds.matrix.row_nnz(0) == 1);
}

TEST_CASE("first appearance order is not sorted order") {
  std::istringstream in("z\tb\na\ta\n");
  const Dataset ds = load_triplets(in);
  CHECK(ds.users.key(0) == "z");
  CHECK(ds.items.key(0) == "b");
  CHECK(row_vec(ds.matrix, 1) == std::vector<ItemId>{1});
}

TEST_CASE("schema picks columns and skips comments") {
  std::istringstream in("# ts,item,user\n100,i9,u1\n\n101,i3,u1\n102,i9,u2\n");
  TripletSchema schema;
  schema.user_column = 2;
  schema.item_column = 1;
  schema.delimiter = ',';
  const Dataset ds = load_triplets(in, schema);
  CHECK(ds.matrix.n_users() == 2);
  CHECK(ds.matrix.n_items() == 2);
  CHECK(ds.items.key(0) == "i9");
  CHECK(row_vec(ds.matrix, 0) == std::vector<ItemId>{0, 1});
}

TEST_CASE("malformed line names its line number") {
  std::istringstream in("u1\ti1\nbroken\nu2\ti2\n");
  try {
    load_triplets(in);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(e.detail() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("empty input is an error") {
  std::istringstream empty("");
  CHECK(kind_of([&] { load_triplets(empty); }) == ErrorKind::kEmptyInput);
  std::istringstream only_comments("# nothing\n\n");
  CHECK(kind_of([&] { load_triplets(only_comments); }) == ErrorKind::kEmptyInput);
}

TEST_CASE("from_rows sorts, deduplicates and validates") {
  const auto x = InteractionMatrix::from_rows(4, {{3, 1, 3}, {}, {0}});
  CHECK(row_vec(x, 0) == std::vector<ItemId>{1, 3});
  CHECK(x.row_nnz(1) == 0);
  CHECK(x.empty_rows() == 1);
  CHECK(x.nnz() == 3);
  CHECK(x.row_offsets().back() == x.nnz());
  CHECK(kind_of([] { InteractionMatrix::from_rows(2, {{0, 2}}); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { InteractionMatrix::from_rows(2, {{-1}}); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("stats are exact integer sums") {
  SUBCASE("two rows of two") {
    const auto s = compute_stats(InteractionMatrix::from_rows(3, {{0, 1}, {1, 2}}));
    CHECK(s.sum_nnz2 == 8);
    CHECK(s.sum_nnz3 == 16);
    CHECK(s.d2s == 4.0);
    CHECK(s.d3s == 8.0);
  }
  SUBCASE("singleton") {
    const auto s = compute_stats(InteractionMatrix::from_rows(1, {{0}}));
    CHECK(s.sum_nnz2 == 1);
    CHECK(s.d1s == 1.0);
    CHECK(s.d2s == 1.0);
    CHECK(s.d3s == 1.0);
  }
  SUBCASE("uneven rows") {
    const auto s = compute_stats(InteractionMatrix::from_rows(3, {{0}, {0, 1, 2}}));
    CHECK(s.sum_nnz2 == 10);
    CHECK(s.sum_nnz3 == 28);
  }
  SUBCASE("all rows empty") {
    CHECK(kind_of([] { compute_stats(InteractionMatrix::from_rows(2, {{}, {}})); }) ==
          ErrorKind::kEmptyInput);
  }
}

TEST_CASE("stats obey the moment inequalities") {
  CounterRng rng(7, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testing::random_matrix(rng, 1 + trial % 9, 12, 0, 12);
    if (x.nnz() == 0) continue;
    const auto s = compute_stats(x);
    CHECK(s.d2s >= s.d1s * s.d1s - 1e-12);
    CHECK(s.d3s >= s.d1s * s.d2s - 1e-12);
    CHECK(s.d1s > 0.0);
  }
}

TEST_CASE("pass counter counts full row scans") {
  const auto x = InteractionMatrix::from_rows(3, {{0, 1}, {2}});
  CHECK(x.pass_count() == 0);
  Index seen = 0;
  x.for_each_row([&](Index, std::span<const ItemId> r) { seen += static_cast<Index>(r.size()); });
  CHECK(seen == 3);
  CHECK(x.pass_count() == 1);
  compute_stats(x);
  CHECK(x.pass_count() == 1);
  x.count_pass();
  CHECK(x.pass_count() == 2);
  const InteractionMatrix copy = x;
  CHECK(copy.pass_count() == 2);
  x.reset_pass_count();
  CHECK(x.pass_count() == 0);
}

TEST_CASE("pass counter is safe under concurrent scans") {
  const auto x = InteractionMatrix::from_rows(2, {{0}, {1}});
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 250; ++i) x.for_each_row([](Index, std::span<const ItemId>) {});
    });
  }
  threads.clear();
  CHECK(x.pass_count() == 1000);
}

TEST_CASE("load is deterministic") {
  const std::string text = "b\tx\na\ty\nb\ty\nc\tz\n";
  std::istringstream a(text), b(text);
  const auto da = load_triplets(a);
  const auto db = load_triplets(b);
  CHECK(da.matrix.item_ids() == db.matrix.item_ids());
  CHECK(da.matrix.row_offsets() == db.matrix.row_offsets());
}

TEST_CASE("aligned loading drops unknown keys") {
  std::istringstream train("u1\ti1\nu2\ti2\n");
  const auto ds = load_triplets(train);
  std::istringstream test("u1\ti2\nu3\ti1\nu2\ti9\nu2\ti1\n");
  const auto aligned = load_aligned_triplets(test, ds.users, ds.items);
  CHECK(aligned.rows.size() == 2);
  CHECK(aligned.rows[0] == std::vector<ItemId>{1});
  CHECK(aligned.rows[1] == std::vector<ItemId>{0});
  CHECK(aligned.dropped_unknown_user == 1);
  CHECK(aligned.dropped_unknown_item == 1);
}

TEST_CASE("write then load round-trips the matrix") {
  const auto x = InteractionMatrix::from_rows(4, {{0, 2}, {1, 2, 3}, {3}});
  std::ostringstream out;
  write_triplets(out, x);
  std::istringstream in(out.str());
  const auto ds = load_triplets(in);
  CHECK(ds.matrix.n_users() == 3);
  CHECK(ds.matrix.nnz() == x.nnz());
  const Eigen::MatrixXd a = x.to_dense();
  const Eigen::MatrixXd b = ds.matrix.to_dense();
  for (Index u = 0; u < 3; ++u) {
    for (Index i = 0; i < ds.matrix.n_items(); ++i) {
      const Index orig = std::stoi(ds.items.key(i).substr(1));
      CHECK(b(u, i) == a(u, orig));
    }
  }
}

TEST_CASE("loads a dataset the size of a grocery purchase log") {
  constexpr std::int64_t kTuples = 417246;
  constexpr std::int64_t kUsers = 24304;
  constexpr std::int64_t kItems = 21533;
  std::string text;
  text.reserve(static_cast<std::size_t>(kTuples) * 16);
  for (std::int64_t t = 0; t < kTuples; ++t) {
    text += 'u';
    text += std::to_string(t % kUsers);
    text += '\t';
    text += 'i';
    text += std::to_string((t * 7919) % kItems);
    text += '\n';
  }
  std::istringstream in(text);
  const auto ds = load_triplets(in);
  CHECK(ds.matrix.n_users() == kUsers);
  CHECK(ds.matrix.n_items() == kItems);
  CHECK(ds.matrix.nnz() == kTuples);
  const auto s = compute_stats(ds.matrix);
  CHECK(s.sum_nnz == static_cast<std::uint64_t>(kTuples));
}
