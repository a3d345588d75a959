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

#ifndef SPECCF_RNG_HPP
#define SPECCF_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>

#include <Eigen/Core>

namespace speccf {

/// Counter-based generator: the i-th draw of stream (key) is a pure
/// function of (key, i), so independent streams can be derived from a seed
/// and a stream index without sharing state. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
                      std::uint64_t substream = 0)
      : key_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) + stream * 0x9e3779b97f4a7c15ULL +
                 mix(substream + 0xbb67ae8584caa73bULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller; one cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open_zero()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Integer uniform on [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>((*this)());
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = max() - max() % span;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_open_zero();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open_zero();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Unit vector drawn uniformly from the sphere.
  template <typename Scalar = double>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> unit_vector(Eigen::Index n) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n);
    do {
      for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<Scalar>(normal());
    } while (v.norm() == Scalar(0));
    v.normalize();
    return v;
  }

  /// Sample from Dirichlet(alpha, ..., alpha) of dimension n.
  Eigen::VectorXd dirichlet(Eigen::Index n, double alpha) {
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = gamma(alpha);
    const double s = g.sum();
    if (s <= 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return g / s;
  }

  /// Index drawn from a cumulative distribution (last entry is the total).
  Eigen::Index categorical(std::span<const double> cumulative) {
    const double u = uniform() * cumulative.back();
    Eigen::Index lo = 0;
    Eigen::Index hi = static_cast<Eigen::Index>(cumulative.size()) - 1;
    while (lo < hi) {
      const Eigen::Index mid = lo + (hi - lo) / 2;
      if (cumulative[static_cast<std::size_t>(mid)] > u) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace speccf

#endif  // SPECCF_RNG_HPP
