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


#include "speccf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "speccf/error.hpp"
#include "text_io.hpp"

namespace speccf {

namespace {

void require(bool ok, const char* field, const char* rule) {
  if (!ok) throw Error(ErrorKind::kInvalidArgument, std::string(field) + ": " + rule);
}

void validate(const BoundInputs& in) {
  require(std::isfinite(in.sigmaK) && in.sigmaK > 0.0, "sigmaK", "must be > 0");
  require(std::isfinite(in.sigma1) && in.sigma1 >= in.sigmaK, "sigma1", "must be >= sigmaK");
  require(in.delta > 0.0 && in.delta < 1.0, "delta", "must lie in (0, 1)");
  require(in.pi_min > 0.0, "pi_min", "must be > 0");
  require(in.pi_max >= in.pi_min && in.pi_max <= 1.0, "pi_max", "must lie in [pi_min, 1]");
  require(std::isfinite(in.d2s) && in.d2s > 0.0, "d2s", "must be > 0");
  require(std::isfinite(in.d3s) && in.d3s > 0.0, "d3s", "must be > 0");
  require(in.k >= 1, "k", "must be >= 1");
  require(in.n >= 1, "n", "must be >= 1");
  require(in.c1 > 0.0, "c1", "must be > 0");
  require(in.c2 > 0.0, "c2", "must be > 0");
}

}  // namespace

double bound_epsilon(double delta) {
  require(delta > 0.0 && delta < 1.0, "delta", "must lie in (0, 1)");
  return 1.0 + std::sqrt(std::log(1.0 / delta) / 2.0);
}

double mu_error_bound(double sigma1, double sigmaK, double d2s, double d3s, double epsilon,
                      double n) {
  const double s1 = std::sqrt(sigma1);
  const double coeff = 160.0 * s1 / (d2s * std::pow(sigmaK, 2.5)) +
                       32.0 * std::sqrt(2.0 * sigma1) / (d3s * std::pow(sigmaK, 1.5)) +
                       4.0 * s1 / (d2s * sigmaK);
  return coeff * epsilon / std::sqrt(n);
}

double pi_error_bound(double sigmaK, double d3s, double epsilon, double n) {
  const double coeff = 200.0 / std::pow(sigmaK, 2.5) + 40.0 * std::sqrt(2.0) / std::pow(sigmaK, 1.5);
  return coeff * epsilon / (d3s * std::sqrt(n));
}

BoundReport compute_bounds(const BoundInputs& in) {
  validate(in);
  BoundReport r;
  r.epsilon = bound_epsilon(in.delta);
  const double k = static_cast<double>(in.k);
  // The loglog term is undefined or negative for small arguments; it is
  // dropped there and the threshold is kept nonnegative.
  const double inner = (k / in.c1) * std::sqrt(in.pi_max / in.pi_min);
  double loglog = 0.0;
  if (inner > 1.0) loglog = std::log(std::log(inner));
  r.n1 = std::max(0.0, in.c2 * (std::log(k) + loglog));
  r.n2 = std::pow(r.epsilon / (in.d2s * in.sigmaK), 2.0);
  const double t = 10.0 / (in.d2s * std::pow(in.sigmaK, 2.5)) +
                   2.0 * std::sqrt(2.0) / (in.d3s * std::pow(in.sigmaK, 1.5));
  r.n3 = k * k * t * t * r.epsilon * r.epsilon;
  r.n_required = std::max({r.n1, r.n2, r.n3});
  const auto n = static_cast<double>(in.n);
  r.mu_bound = mu_error_bound(in.sigma1, in.sigmaK, in.d2s, in.d3s, r.epsilon, n);
  r.pi_bound = pi_error_bound(in.sigmaK, in.d3s, r.epsilon, n);
  r.satisfied = n >= r.n_required;
  return r;
}

void write_bound_report(std::ostream& out, const BoundInputs& in, const BoundReport& r,
                        bool tsv) {
  const std::vector<std::pair<std::string, double>> rows = {
      {"sigma1", in.sigma1},
      {"sigmaK", in.sigmaK},
      {"d2s", in.d2s},
      {"d3s", in.d3s},
      {"k", static_cast<double>(in.k)},
      {"n", static_cast<double>(in.n)},
      {"delta", in.delta},
      {"pi_max", in.pi_max},
      {"pi_min", in.pi_min},
      {"c1", in.c1},
      {"c2", in.c2},
      {"epsilon", r.epsilon},
      {"n1", r.n1},
      {"n2", r.n2},
      {"n3", r.n3},
      {"n_required", r.n_required},
      {"mu_bound", r.mu_bound},
      {"pi_bound", r.pi_bound},
  };
  if (!tsv) {
    out << "# thresholds n2, n3 use implied constant 1 (order-of-magnitude)\n";
    out << "# pi_max, pi_min are estimates when taken from a fitted model\n";
  }
  for (const auto& [key, value] : rows) {
    if (tsv) {
      out << key << '\t';
    } else {
      out << std::left << std::setw(12) << key << ' ';
    }
    text_io::write_double(out, value);
    out << '\n';
  }
  if (tsv) {
    out << "satisfied\t" << (r.satisfied ? 1 : 0) << '\n';
  } else {
    out << std::left << std::setw(12) << "satisfied" << ' ' << (r.satisfied ? "yes" : "no") << '\n';
  }
}

}  // namespace speccf
