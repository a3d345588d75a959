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

#include "speccf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_set>

#include "speccf/error.hpp"
#include "speccf/rng.hpp"
#include "text_io.hpp"

namespace speccf {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

RankingMetrics ranking_metrics(const std::vector<std::vector<ItemId>>& recommendations,
                               const std::vector<std::vector<ItemId>>& test,
                               std::span<const Index> tau_list) {
  if (recommendations.size() != test.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "recommendation lists and test sets cover different user counts");
  }
  for (Index tau : tau_list) {
    if (tau <= 0) throw Error(ErrorKind::kInvalidArgument, "tau must be positive", tau);
  }
  const std::size_t n_tau = tau_list.size();
  RankingMetrics m;
  m.tau_list.assign(tau_list.begin(), tau_list.end());

  std::vector<std::vector<double>> prec(n_tau), rec(n_tau), ap(n_tau);
  for (std::size_t u = 0; u < test.size(); ++u) {
    const auto& relevant = test[u];
    if (relevant.empty()) {
      ++m.n_users_skipped;
      continue;
    }
    ++m.n_users_evaluated;
    const std::unordered_set<ItemId> rel(relevant.begin(), relevant.end());
    const auto& recs = recommendations[u];
    for (std::size_t t = 0; t < n_tau; ++t) {
      const auto tau = static_cast<std::size_t>(tau_list[t]);
      const std::size_t depth = std::min(tau, recs.size());
      double hits = 0.0;
      double precision_sum = 0.0;
      for (std::size_t r = 0; r < depth; ++r) {
        if (rel.count(recs[r])) {
          hits += 1.0;
          precision_sum += hits / static_cast<double>(r + 1);
        }
      }
      prec[t].push_back(hits / static_cast<double>(tau));
      rec[t].push_back(hits / static_cast<double>(rel.size()));
      ap[t].push_back(precision_sum / static_cast<double>(std::min(tau, rel.size())));
    }
  }
  const auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
  };
  for (std::size_t t = 0; t < n_tau; ++t) {
    m.precision.push_back(mean(prec[t]));
    m.recall.push_back(mean(rec[t]));
    m.map.push_back(mean(ap[t]));
  }
  return m;
}

void write_metrics_report(std::ostream& out, const RankingMetrics& m) {
  out << "tau\tprecision\trecall\tmap\n";
  for (std::size_t t = 0; t < m.tau_list.size(); ++t) {
    out << m.tau_list[t] << '\t';
    text_io::write_double(out, m.precision[t]);
    out << '\t';
    text_io::write_double(out, m.recall[t]);
    out << '\t';
    text_io::write_double(out, m.map[t]);
    out << '\n';
  }
}

HoldoutSplit split_holdout(const InteractionMatrix& x, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "holdout fraction must be in (0, 1)");
  }
  std::vector<std::vector<ItemId>> train(static_cast<std::size_t>(x.n_users()));
  std::vector<std::vector<ItemId>> test(static_cast<std::size_t>(x.n_users()));
  for (Index u = 0; u < x.n_users(); ++u) {
    auto items = x.row(u);
    std::vector<ItemId> shuffled(items.begin(), items.end());
    const auto n = static_cast<Index>(shuffled.size());
    if (n < 2) {
      train[static_cast<std::size_t>(u)] = std::move(shuffled);
      continue;
    }
    CounterRng rng(seed, 0x686f6c64, static_cast<std::uint64_t>(u));
    for (Index i = n - 1; i > 0; --i) {
      std::swap(shuffled[static_cast<std::size_t>(i)],
                shuffled[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    }
    const Index n_test =
        std::clamp<Index>(static_cast<Index>(std::llround(fraction * static_cast<double>(n))), 1,
                          n - 1);
    test[static_cast<std::size_t>(u)].assign(shuffled.begin(), shuffled.begin() + n_test);
    train[static_cast<std::size_t>(u)].assign(shuffled.begin() + n_test, shuffled.end());
  }
  return {InteractionMatrix::from_rows(x.n_items(), std::move(train)),
          InteractionMatrix::from_rows(x.n_items(), std::move(test))};
}

std::vector<ItemId> random_ranking(Index n_items, std::span<const ItemId> history, Index tau,
                                   std::uint64_t seed, std::uint64_t user) {
  std::vector<char> seen(static_cast<std::size_t>(n_items), 0);
  for (ItemId y : history) seen[static_cast<std::size_t>(y)] = 1;
  std::vector<ItemId> pool;
  for (Index i = 0; i < n_items; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) pool.push_back(static_cast<ItemId>(i));
  }
  CounterRng rng(seed, 0x72616e64, user);
  const auto n = static_cast<Index>(pool.size());
  const Index take = std::min(tau, n);
  for (Index i = 0; i < take; ++i) {
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(rng.uniform_int(i, n - 1))]);
  }
  pool.resize(static_cast<std::size_t>(take));
  return pool;
}

}  // namespace speccf
