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

#include "speccf/plsi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "speccf/error.hpp"
#include "speccf/model.hpp"
#include "speccf/rng.hpp"
#include "text_io.hpp"

namespace speccf {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double safe_log(double p) { return std::log(std::max(p, kProbabilityFloor)); }

}  // namespace

PlsiModel plsi_train(const InteractionMatrix& x, const PlsiOptions& opts) {
  const Index k = opts.k;
  const Index d = x.n_items();
  const Index n = x.n_users();
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "K must be >= 1");
  if (x.nnz() == 0) throw Error(ErrorKind::kEmptyInput, "all rows are empty");

  // Row-major working copies: the E-step reads one row of each per nonzero.
  RowMatrix item_given_h(d, k);
  RowMatrix h_given_u(n, k);
  {
    CounterRng rng(opts.seed, 0x706c7369);
    Eigen::MatrixXd cols(d, k);
    for (Index c = 0; c < k; ++c) cols.col(c) = rng.dirichlet(d, opts.init_alpha);
    item_given_h = cols;
    for (Index u = 0; u < n; ++u) h_given_u.row(u) = rng.dirichlet(k, opts.init_alpha).transpose();
  }

  PlsiModel m;
  RowMatrix item_acc(d, k);
  RowMatrix user_acc(n, k);
  Eigen::RowVectorXd q(k);
  for (int iter = 0;; ++iter) {
    item_acc.setZero();
    user_acc.setZero();
    double loglik = 0.0;
    for (Index u = 0; u < n; ++u) {
      const auto items = x.row(u);
      for (ItemId y : items) {
        q = item_given_h.row(y).cwiseProduct(h_given_u.row(u));
        const double z = q.sum();
        loglik += safe_log(z);
        if (z > 0.0) {
          q /= z;
          item_acc.row(y) += q;
          user_acc.row(u) += q;
        }
      }
    }
    m.loglik_trace.push_back(loglik);
    const std::size_t t = m.loglik_trace.size();
    if (t >= 2) {
      const double prev = m.loglik_trace[t - 2];
      if (loglik - prev < opts.rel_tol * std::abs(prev)) {
        m.stopped_by_rule = true;
        break;
      }
    }
    if (iter >= opts.max_iter) break;

    // M-step
    const Eigen::RowVectorXd col_sums = item_acc.colwise().sum();
    for (Index c = 0; c < k; ++c) {
      if (col_sums(c) > 0.0) item_given_h.col(c) = item_acc.col(c) / col_sums(c);
    }
    for (Index u = 0; u < n; ++u) {
      const double len = static_cast<double>(x.row_nnz(u));
      if (len > 0.0) h_given_u.row(u) = user_acc.row(u) / len;
    }
    ++m.iterations;
  }
  m.p_y_given_h = item_given_h;
  m.p_h_given_u = h_given_u;
  return m;
}

double plsi_loglik(const InteractionMatrix& x, const PlsiModel& m) {
  if (x.n_items() != m.d() || x.n_users() != m.n()) {
    throw Error(ErrorKind::kDimensionMismatch, "PLSI model does not match data shape");
  }
  double loglik = 0.0;
  for (Index u = 0; u < x.n_users(); ++u) {
    for (ItemId y : x.row(u)) loglik += safe_log(m.p_y_given_h.row(y).dot(m.p_h_given_u.row(u)));
  }
  return loglik;
}

Eigen::VectorXd plsi_predict(Index user, const PlsiModel& m) {
  if (user < 0 || user >= m.n()) {
    throw Error(ErrorKind::kUnknownUser, "user " + std::to_string(user) + " was not in training",
                user);
  }
  return m.p_y_given_h * m.p_h_given_u.row(user).transpose();
}

void write_plsi(std::ostream& out, const PlsiModel& m) {
  out << "SPECCF-PLSI 1 " << m.d() << ' ' << m.k() << ' ' << m.n() << '\n';
  for (Index r = 0; r < m.d(); ++r) text_io::write_row(out, m.p_y_given_h.row(r));
  for (Index r = 0; r < m.n(); ++r) text_io::write_row(out, m.p_h_given_u.row(r));
}

PlsiModel read_plsi(std::istream& in) {
  text_io::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw Error(ErrorKind::kTruncated, "PLSI file is empty", 1);
  const auto head = text_io::split_ws(line);
  if (head.empty() || head[0] != "SPECCF-PLSI") {
    throw Error(ErrorKind::kMalformedHeader, "PLSI header must start with SPECCF-PLSI", 1);
  }
  if (head.size() < 2) throw Error(ErrorKind::kMalformedHeader, "PLSI header lacks version", 1);
  const auto version = text_io::parse_int(head[1], ErrorKind::kMalformedHeader, "version");
  if (version != 1) {
    throw Error(ErrorKind::kUnsupportedVersion,
                "unsupported PLSI model version " + std::to_string(version), version);
  }
  if (head.size() != 5) {
    throw Error(ErrorKind::kMalformedHeader, "PLSI header must be 'SPECCF-PLSI 1 <D> <K> <N>'", 1);
  }
  const auto d = text_io::parse_int(head[2], ErrorKind::kMalformedHeader, "D");
  const auto k = text_io::parse_int(head[3], ErrorKind::kMalformedHeader, "K");
  const auto n = text_io::parse_int(head[4], ErrorKind::kMalformedHeader, "N");
  if (d < 1 || k < 1 || n < 0) {
    throw Error(ErrorKind::kMalformedHeader, "D and K must be positive, N nonnegative", 1);
  }
  PlsiModel m;
  m.p_y_given_h.resize(d, k);
  for (Index r = 0; r < d; ++r) m.p_y_given_h.row(r) = reader.row(k, "P[y|h] row");
  m.p_h_given_u.resize(n, k);
  for (Index r = 0; r < n; ++r) m.p_h_given_u.row(r) = reader.row(k, "P[h|u] row");
  reader.expect_end();
  return m;
}

void save_plsi(const std::string& path, const PlsiModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  write_plsi(out, m);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

PlsiModel load_plsi(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return read_plsi(in);
}

}  // namespace speccf
