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

#include "speccf/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "speccf/error.hpp"
#include "text_io.hpp"

namespace speccf {

Eigen::VectorXd floor_to_simplex(const Eigen::VectorXd& v, double floor) {
  const Index n = v.size();
  const double total = v.sum();
  if (n == 0 || !(total > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "floor_to_simplex needs positive mass");
  }
  const Eigen::VectorXd p = v / total;
  std::vector<char> floored(static_cast<std::size_t>(n), 0);
  Index n_floored = 0;
  double scale = 1.0;
  for (;;) {
    double free_sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (!floored[static_cast<std::size_t>(i)]) free_sum += p(i);
    }
    const double free_mass = 1.0 - floor * static_cast<double>(n_floored);
    if (n_floored == n || !(free_sum > 0.0) || !(free_mass > 0.0)) {
      return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    }
    scale = free_mass / free_sum;
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      if (!floored[static_cast<std::size_t>(i)] && p(i) * scale < floor) {
        floored[static_cast<std::size_t>(i)] = 1;
        ++n_floored;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (n_floored == 0) return p;
  Eigen::VectorXd out(n);
  for (Index i = 0; i < n; ++i) out(i) = floored[static_cast<std::size_t>(i)] ? floor : p(i) * scale;
  return out;
}

MomModel recover_parameters(const WhiteningTransform& wt,
                            const std::vector<TensorEigenpair<double>>& pairs,
                            RecoveryDiagnostics* diagnostics) {
  const Index k = wt.k();
  if (static_cast<Index>(pairs.size()) != k) {
    throw Error(ErrorKind::kDimensionMismatch,
                "expected " + std::to_string(k) + " tensor eigenpairs, got " +
                    std::to_string(pairs.size()));
  }
  const Index d = wt.d();
  Eigen::MatrixXd o(d, k);
  Eigen::VectorXd pi_raw(k);
  std::vector<Index> clipped(static_cast<std::size_t>(k), 0);
  for (Index c = 0; c < k; ++c) {
    const auto& pair = pairs[static_cast<std::size_t>(c)];
    if (!(pair.lambda > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "tensor eigenvalue " + std::to_string(c) + " is not positive", c);
    }
    if (pair.vector.size() != k) {
      throw Error(ErrorKind::kDimensionMismatch, "tensor eigenvector has wrong length");
    }
    // lambda_k scales the column uniformly and cancels in normalization.
    const Eigen::VectorXd raw = wt.w_pinv * pair.vector;
    const Eigen::VectorXd positive = raw.cwiseMax(0.0);
    if (!(positive.sum() > 0.0)) {
      throw Error(ErrorKind::kDegenerateTopic,
                  "component " + std::to_string(c) + " has no positive mass after clipping", c);
    }
    o.col(c) = floor_to_simplex(positive, kProbabilityFloor);
    clipped[static_cast<std::size_t>(c)] = (raw.array() < kProbabilityFloor).count();
    pi_raw(c) = 1.0 / (pair.lambda * pair.lambda);
  }
  const double mass = pi_raw.sum();

  // canonical order: descending pi, stable
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return pi_raw(a) > pi_raw(b); });

  MomModel m;
  m.o.resize(d, k);
  m.pi.resize(k);
  for (Index c = 0; c < k; ++c) {
    m.o.col(c) = o.col(order[static_cast<std::size_t>(c)]);
    m.pi(c) = pi_raw(order[static_cast<std::size_t>(c)]) / mass;
  }
  if (diagnostics) {
    diagnostics->lambda_mass_deviation = std::abs(mass - 1.0);
    diagnostics->clipped_entries.clear();
    for (Index c = 0; c < k; ++c) {
      diagnostics->clipped_entries.push_back(clipped[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])]);
    }
  }
  return m;
}

Eigen::VectorXd posterior_for_history(std::span<const ItemId> history, const MomModel& m) {
  const Index k = m.k();
  Eigen::VectorXd s(k);
  for (Index c = 0; c < k; ++c) s(c) = std::log(std::max(m.pi(c), kProbabilityFloor));
  for (ItemId y : history) {
    if (y < 0 || y >= m.d()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "history item " + std::to_string(y) + " outside [0, " + std::to_string(m.d()) +
                      ")");
    }
    for (Index c = 0; c < k; ++c) s(c) += std::log(std::max(m.o(y, c), kProbabilityFloor));
  }
  if (history.empty()) return m.pi / m.pi.sum();
  const double top = s.maxCoeff();
  Eigen::VectorXd p = (s.array() - top).exp().matrix();
  return p / p.sum();
}

UserPosterior compute_posteriors(const InteractionMatrix& x, const MomModel& m) {
  if (x.n_items() != m.d()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "model has " + std::to_string(m.d()) + " items but data has " +
                    std::to_string(x.n_items()));
  }
  UserPosterior post;
  post.rows.resize(x.n_users(), m.k());
  x.for_each_row([&](Index u, std::span<const ItemId> items) {
    post.rows.row(u) = posterior_for_history(items, m).transpose();
  });
  return post;
}

Eigen::VectorXd predict_scores_from_posterior(const Eigen::VectorXd& posterior,
                                              const MomModel& m) {
  if (posterior.size() != m.k()) {
    throw Error(ErrorKind::kDimensionMismatch, "posterior length != component count");
  }
  return m.o * posterior;
}

Eigen::VectorXd predict_scores(std::span<const ItemId> history, const MomModel& m) {
  return predict_scores_from_posterior(posterior_for_history(history, m), m);
}

std::vector<ItemId> rank_items(const Eigen::VectorXd& scores, std::span<const ItemId> history,
                               Index tau, bool exclude_seen) {
  if (tau < 1) throw Error(ErrorKind::kInvalidArgument, "tau must be >= 1");
  std::vector<char> seen(static_cast<std::size_t>(scores.size()), 0);
  if (exclude_seen) {
    for (ItemId y : history) {
      if (y >= 0 && y < scores.size()) seen[static_cast<std::size_t>(y)] = 1;
    }
  }
  std::vector<ItemId> items;
  items.reserve(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i) {
    if (!seen[static_cast<std::size_t>(i)]) items.push_back(static_cast<ItemId>(i));
  }
  const auto by_score = [&](ItemId a, ItemId b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(tau), items.size());
  std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n), items.end(),
                    by_score);
  items.resize(n);
  return items;
}

std::vector<ItemId> recommend_top(std::span<const ItemId> history, const MomModel& m, Index tau,
                                  bool exclude_seen) {
  return rank_items(predict_scores(history, m), history, tau, exclude_seen);
}

void write_model(std::ostream& out, const MomModel& m) {
  out << "SPECCF 1 " << m.d() << ' ' << m.k() << '\n';
  text_io::write_row(out, m.pi.transpose());
  for (Index r = 0; r < m.d(); ++r) text_io::write_row(out, m.o.row(r));
}

MomModel read_model(std::istream& in) {
  text_io::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw Error(ErrorKind::kTruncated, "model file is empty", 1);
  const auto head = text_io::split_ws(line);
  if (head.empty() || head[0] != "SPECCF") {
    throw Error(ErrorKind::kMalformedHeader, "model header must start with SPECCF", 1);
  }
  if (head.size() < 2) throw Error(ErrorKind::kMalformedHeader, "model header lacks version", 1);
  const auto version = text_io::parse_int(head[1], ErrorKind::kMalformedHeader, "version");
  if (version != 1) {
    throw Error(ErrorKind::kUnsupportedVersion,
                "unsupported model version " + std::to_string(version), version);
  }
  if (head.size() != 4) {
    throw Error(ErrorKind::kMalformedHeader, "model header must be 'SPECCF 1 <D> <K>'", 1);
  }
  const auto d = text_io::parse_int(head[2], ErrorKind::kMalformedHeader, "D");
  const auto k = text_io::parse_int(head[3], ErrorKind::kMalformedHeader, "K");
  if (d < 1 || k < 1) throw Error(ErrorKind::kMalformedHeader, "D and K must be positive", 1);

  MomModel m;
  m.pi = reader.row(k, "pi row").transpose();
  m.o.resize(d, k);
  for (Index r = 0; r < d; ++r) m.o.row(r) = reader.row(k, "O row");
  reader.expect_end();
  return m;
}

void save_model(const std::string& path, const MomModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  write_model(out, m);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

MomModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return read_model(in);
}

void write_posteriors(std::ostream& out, const UserPosterior& p, const KeyIndex* users) {
  for (Index u = 0; u < p.rows.rows(); ++u) {
    if (users) {
      out << users->key(u);
    } else {
      out << u;
    }
    for (Index c = 0; c < p.rows.cols(); ++c) {
      out << '\t';
      text_io::write_double(out, p.rows(u, c));
    }
    out << '\n';
  }
}

}  // namespace speccf
