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

// PLSI trained by EM; the iterative comparator for the moment method.

#ifndef SPECCF_PLSI_HPP
#define SPECCF_PLSI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "speccf/data.hpp"

namespace speccf {

struct PlsiModel {
  Eigen::MatrixXd p_y_given_h;  // D x K, columns sum to 1
  Eigen::MatrixXd p_h_given_u;  // N x K, rows sum to 1
  std::vector<double> loglik_trace;  // log-likelihood before each M-step, plus the final one
  int iterations = 0;                // M-steps applied
  bool stopped_by_rule = false;      // relative-improvement rule fired before max_iter

  Index k() const { return p_y_given_h.cols(); }
  Index d() const { return p_y_given_h.rows(); }
  Index n() const { return p_h_given_u.rows(); }

  /// (D - 1) K + N (K - 1)
  std::int64_t effective_parameters() const { return (d() - 1) * k() + n() * (k() - 1); }
};

struct PlsiOptions {
  Index k = 100;
  std::uint64_t seed = 42;
  double rel_tol = 1e-3;  // stop once L_t - L_{t-1} < rel_tol * |L_{t-1}|
  int max_iter = 200;
  double init_alpha = 1.0;  // Dirichlet concentration of the random start
};

PlsiModel plsi_train(const InteractionMatrix& x, const PlsiOptions& opts);

/// sum_{u, y in Y_u} log sum_k P[y | k] P[k | u]
double plsi_loglik(const InteractionMatrix& x, const PlsiModel& m);

/// Mixture prediction for a training user. Throws kUnknownUser.
Eigen::VectorXd plsi_predict(Index user, const PlsiModel& m);

/// Text file: "SPECCF-PLSI 1 <D> <K> <N>", D rows of P[y|h], N rows of P[h|u].
void write_plsi(std::ostream& out, const PlsiModel& m);
PlsiModel read_plsi(std::istream& in);
void save_plsi(const std::string& path, const PlsiModel& m);
PlsiModel load_plsi(const std::string& path);

}  // namespace speccf

#endif  // SPECCF_PLSI_HPP
