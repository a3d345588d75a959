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


// Sample-size thresholds and parameter-error bounds for the moment
// estimator. Natural logarithms throughout. Thresholds with an unspecified
// implied constant use constant 1 and are order-of-magnitude only.

#ifndef SPECCF_BOUNDS_HPP
#define SPECCF_BOUNDS_HPP

#include <cstdint>
#include <iosfwd>

#include "speccf/data.hpp"

namespace speccf {

struct BoundInputs {
  double sigma1 = 0.0;  // largest eigenvalue of M2
  double sigmaK = 0.0;  // K-th largest eigenvalue of M2
  double d2s = 0.0;     // mean nnz^2 per user
  double d3s = 0.0;     // mean nnz^3 per user
  Index k = 0;
  Index n = 0;  // users
  double delta = 0.05;
  double pi_max = 0.0;
  double pi_min = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;
};

struct BoundReport {
  double epsilon = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;
  double n_required = 0.0;
  double mu_bound = 0.0;
  double pi_bound = 0.0;
  bool satisfied = false;
};

/// 1 + sqrt(log(1/delta) / 2)
double bound_epsilon(double delta);

/// Bound on ||mu_k - mu_hat_k||_2 for a given epsilon and N.
double mu_error_bound(double sigma1, double sigmaK, double d2s, double d3s, double epsilon,
                      double n);

/// Bound on |pi_k - pi_hat_k| for a given epsilon and N.
double pi_error_bound(double sigmaK, double d3s, double epsilon, double n);

/// Throws kInvalidArgument naming the first field that breaks
/// 0 < sigmaK <= sigma1, 0 < delta < 1, 0 < pi_min <= pi_max <= 1,
/// positive d2s, d3s, k, n, c1, c2.
BoundReport compute_bounds(const BoundInputs& in);

/// Aligned "key  value" lines, or "key<TAB>value" when tsv is set.
void write_bound_report(std::ostream& out, const BoundInputs& in, const BoundReport& r,
                        bool tsv = false);

}  // namespace speccf

#endif  // SPECCF_BOUNDS_HPP
