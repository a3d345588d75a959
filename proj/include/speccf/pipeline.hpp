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


// End-to-end moment training: M2, top-K eigenpairs, whitening, whitened
// third moment, tensor decomposition, parameter recovery, posteriors.

#ifndef SPECCF_PIPELINE_HPP
#define SPECCF_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "speccf/data.hpp"
#include "speccf/model.hpp"
#include "speccf/moments.hpp"
#include "speccf/tensor.hpp"
#include "speccf/whitening.hpp"

namespace speccf {

struct TrainConfig {
  Index k = 100;
  double eig_tol = 1e-10;
  int eig_max_iter = 0;  // 0 means 300 * K
  int restarts = 0;      // L; 0 means 50 * K
  int iters = 100;       // power iterations per restart
  std::uint64_t seed = 42;
  bool include_diagonal = true;
  bool exclude_seen = true;
  std::string input;
  std::string output;
  std::string posteriors_output;   // optional
  std::string diagnostics_output;  // optional JSON
  TripletSchema schema;
};

struct TrainDiagnostics {
  std::uint64_t passes = 0;
  Index n_users = 0;
  Index n_items = 0;
  std::int64_t nnz = 0;
  Eigen::VectorXd spectrum;   // top-K eigenvalues of M2
  Eigen::VectorXd residuals;  // eigen-residual norms
  int eig_restarts = 0;
  std::int64_t eig_matvecs = 0;
  Eigen::VectorXd lambdas;
  double lambda_mass_deviation = 0.0;  // |sum lambda_k^-2 - 1|
  double whitening_error = 0.0;        // max |W^T M2 W - I|
  double pinv_error = 0.0;             // max |W+^T W - I|
  std::vector<Index> clipped_entries;
  std::int64_t mom_parameters = 0;
  std::int64_t plsi_parameters = 0;  // what PLSI with the same K would need
  std::vector<std::pair<std::string, double>> stage_seconds;
  double total_seconds = 0.0;
};

struct TrainResult {
  MomModel model;
  UserPosterior posteriors;
  WhiteningTransform whitener;
  PairwiseMoment m2;
  WhitenedTriple m3;
  std::vector<TensorEigenpair<double>> pairs;
  TrainDiagnostics diagnostics;
};

/// Produces the whitened third moment for a given W.
using WhitenedMomentFn = std::function<WhitenedTriple(const Eigen::MatrixXd&)>;

/// Whitening, decomposition and recovery from an already estimated M2.
/// Used directly with population moments in planted experiments.
TrainResult fit_from_moments(PairwiseMoment m2, const WhitenedMomentFn& m3_of_w,
                             const TrainConfig& cfg);

/// Full training on an interaction matrix. Resets and reports the pass
/// counter; errors carry the failing stage's name.
TrainResult train_model(const InteractionMatrix& x, const TrainConfig& cfg);

/// Loads cfg.input, trains, writes the model (and optional posteriors and
/// diagnostics). The returned dataset keeps the key dictionaries.
std::pair<TrainResult, Dataset> run_train(const TrainConfig& cfg);

/// max |W^T M2 W - I| and max |W+^T W - I|
std::pair<double, double> whitening_errors(const PairwiseMoment& m2, const WhiteningTransform& wt);

void write_diagnostics_json(std::ostream& out, const TrainDiagnostics& d);

}  // namespace speccf

#endif  // SPECCF_PIPELINE_HPP
