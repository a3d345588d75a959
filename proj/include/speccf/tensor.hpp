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

// Dense symmetric third-order tensors and the robust tensor power method.
//
// Entries are stored as a full K^3 array, index (i, j, l) at (i*K + j)*K + l.
// Symmetry under index permutation is an invariant callers maintain; every
// constructor in this header preserves it.

#ifndef SPECCF_TENSOR_HPP
#define SPECCF_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "speccf/error.hpp"
#include "speccf/parallel.hpp"
#include "speccf/rng.hpp"

namespace speccf {

template <typename Scalar>
class SymmetricTensor3 {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SymmetricTensor3() = default;
  explicit SymmetricTensor3(Eigen::Index k) : k_(k), values_(Vector::Zero(k * k * k)) {}

  Eigen::Index k() const { return k_; }

  Scalar& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index l) {
    return values_((i * k_ + j) * k_ + l);
  }
  Scalar operator()(Eigen::Index i, Eigen::Index j, Eigen::Index l) const {
    return values_((i * k_ + j) * k_ + l);
  }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  /// T_i as a K x K matrix (symmetric).
  Eigen::Map<const Matrix> slice(Eigen::Index i) const {
    return Eigen::Map<const Matrix>(values_.data() + i * k_ * k_, k_, k_);
  }

  /// T += weight * v (x) v (x) v
  template <typename Derived>
  void add_rank_one(Scalar weight, const Eigen::MatrixBase<Derived>& v) {
    for (Eigen::Index i = 0; i < k_; ++i) {
      for (Eigen::Index j = 0; j < k_; ++j) {
        const Scalar wij = weight * v(i) * v(j);
        for (Eigen::Index l = 0; l < k_; ++l) (*this)(i, j, l) += wij * v(l);
      }
    }
  }

  template <typename Derived>
  static SymmetricTensor3 rank_one(Scalar weight, const Eigen::MatrixBase<Derived>& v) {
    SymmetricTensor3 t(v.size());
    t.add_rank_one(weight, v);
    return t;
  }

  /// Largest |T_ijl - T_pi(ijl)| over all index permutations.
  Scalar max_asymmetry() const {
    Scalar worst = 0;
    for (Eigen::Index i = 0; i < k_; ++i) {
      for (Eigen::Index j = 0; j < k_; ++j) {
        for (Eigen::Index l = 0; l < k_; ++l) {
          const Scalar t = (*this)(i, j, l);
          for (Scalar other : {(*this)(i, l, j), (*this)(j, i, l), (*this)(j, l, i),
                               (*this)(l, i, j), (*this)(l, j, i)}) {
            worst = std::max(worst, static_cast<Scalar>(std::abs(t - other)));
          }
        }
      }
    }
    return worst;
  }

  template <typename NewScalar>
  SymmetricTensor3<NewScalar> cast() const {
    SymmetricTensor3<NewScalar> out(k_);
    out.values() = values_.template cast<NewScalar>();
    return out;
  }

 private:
  Eigen::Index k_ = 0;
  Vector values_;
};

template <typename Scalar>
struct TensorApplyResult {
  Scalar value;                                  // T(v, v, v)
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tiv;  // T(I, v, v)
};

/// Multilinear contractions T(v,v,v) and T(I,v,v).
template <typename Scalar, typename Derived>
TensorApplyResult<Scalar> tensor_apply(const SymmetricTensor3<Scalar>& t,
                                       const Eigen::MatrixBase<Derived>& v) {
  using Matrix = typename SymmetricTensor3<Scalar>::Matrix;
  const Eigen::Index k = t.k();
  if (v.size() != k) {
    throw Error(ErrorKind::kDimensionMismatch,
                "vector length " + std::to_string(v.size()) + " != tensor order " +
                    std::to_string(k));
  }
  // values viewed as K x K^2: column (i*K + j) holds T_ij. along l.
  Eigen::Map<const Matrix> unfolded(t.values().data(), k, k * k);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tvl = unfolded.transpose() * v;
  Eigen::Map<const Matrix> folded(tvl.data(), k, k);  // (j, i)
  TensorApplyResult<Scalar> out;
  out.tiv = folded.transpose() * v;
  out.value = v.dot(out.tiv);
  return out;
}

/// T(Q, Q, Q) for a K x M matrix Q: result_abc = sum T_ijl Q_ia Q_jb Q_lc.
template <typename Scalar, typename Derived>
SymmetricTensor3<Scalar> multilinear(const SymmetricTensor3<Scalar>& t,
                                     const Eigen::MatrixBase<Derived>& q) {
  using Matrix = typename SymmetricTensor3<Scalar>::Matrix;
  const Eigen::Index k = t.k();
  const Eigen::Index m = q.cols();
  if (q.rows() != k) throw Error(ErrorKind::kDimensionMismatch, "multilinear: row mismatch");
  // Contract l, then j, then i; each step is a GEMM on an unfolding.
  Eigen::Map<const Matrix> a(t.values().data(), k, k * k);    // (l | i,j)
  Matrix step1 = q.transpose() * a;                           // (c | i,j)
  Matrix step2(m * k, m);                                     // (c,i | b)
  for (Eigen::Index i = 0; i < k; ++i) {
    // block of columns for fixed i: (c | j)
    step2.block(i * m, 0, m, m) = step1.middleCols(i * k, k) * q;  // (c | b)
  }
  SymmetricTensor3<Scalar> out(m);
  for (Eigen::Index b = 0; b < m; ++b) {
    for (Eigen::Index c = 0; c < m; ++c) {
      for (Eigen::Index a_idx = 0; a_idx < m; ++a_idx) {
        Scalar s = 0;
        for (Eigen::Index i = 0; i < k; ++i) s += q(i, a_idx) * step2(i * m + c, b);
        out(a_idx, b, c) = s;
      }
    }
  }
  return out;
}

template <typename Scalar>
Scalar frobenius_norm(const SymmetricTensor3<Scalar>& t) {
  return t.values().norm();
}

/// Lower bound on sup_{|v|=1} |T(v,v,v)|: the largest magnitude seen along
/// `trials` power-iteration runs started from random unit vectors.
template <typename Scalar>
Scalar operator_norm_lower_bound(const SymmetricTensor3<Scalar>& t, int trials,
                                 std::uint64_t seed = 42, int iters = 100) {
  Scalar best = 0;
  for (int r = 0; r < trials; ++r) {
    CounterRng rng(seed, 0x6f70, static_cast<std::uint64_t>(r));
    auto v = rng.unit_vector<Scalar>(t.k());
    for (int it = 0; it <= iters; ++it) {
      auto res = tensor_apply(t, v);
      best = std::max(best, static_cast<Scalar>(std::abs(res.value)));
      const Scalar n = res.tiv.norm();
      if (!(n > 0)) break;
      v = res.tiv / n;
    }
  }
  return best;
}

template <typename Scalar>
struct TensorEigenpair {
  Scalar lambda;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;
};

struct PowerMethodOptions {
  int restarts = 0;  // L; 0 means 50 * K
  int iters = 100;   // n
  std::uint64_t seed = 42;
  double stop_tol = 1e-13;
  double deflation_floor = 1e-12;
  int workers = 0;  // 0 means thread_count()
};

namespace detail {

template <typename Scalar>
struct PowerRun {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v;
  Scalar value = -std::numeric_limits<Scalar>::infinity();
};

template <typename Scalar>
void power_iterate(const SymmetricTensor3<Scalar>& t, PowerRun<Scalar>& run, int iters,
                   double stop_tol) {
  for (int it = 0; it < iters; ++it) {
    auto res = tensor_apply(t, run.v);
    const Scalar n = res.tiv.norm();
    if (!(n > 0)) break;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> next = res.tiv / n;
    const Scalar step = (next - run.v).norm();
    run.v = std::move(next);
    if (step < static_cast<Scalar>(stop_tol)) break;
  }
  run.value = tensor_apply(t, run.v).value;
}

}  // namespace detail

/// Robust tensor power method with deflation. For each of `k` rounds, runs
/// L random-restart power iterations, keeps the candidate with the largest
/// T(v,v,v), polishes it with n more steps, records lambda = T(v,v,v) and
/// subtracts lambda v^{(x)3}. Candidates with T(v,v,v) < 0 are discarded.
///
/// Restart r of round c draws from its own stream (seed, c, r), so results
/// do not depend on how restarts are scheduled across workers.
///
/// Throws kDegenerateComponent (detail = round index) when the best
/// surviving candidate has lambda <= deflation_floor.
template <typename Scalar>
std::vector<TensorEigenpair<Scalar>> robust_decompose(SymmetricTensor3<Scalar> t,
                                                      Eigen::Index k,
                                                      const PowerMethodOptions& opts = {}) {
  if (k < 1 || k > t.k()) {
    throw Error(ErrorKind::kInvalidArgument,
                "component count must be in [1, " + std::to_string(t.k()) + "]");
  }
  const int restarts = opts.restarts > 0 ? opts.restarts : static_cast<int>(50 * k);
  const int workers = opts.workers > 0 ? opts.workers : thread_count();
  std::vector<TensorEigenpair<Scalar>> pairs;
  pairs.reserve(static_cast<std::size_t>(k));

  for (Eigen::Index round = 0; round < k; ++round) {
    std::vector<detail::PowerRun<Scalar>> runs(static_cast<std::size_t>(restarts));
    parallel_for(
        restarts,
        [&](std::int64_t begin, std::int64_t end) {
          for (std::int64_t r = begin; r < end; ++r) {
            CounterRng rng(opts.seed, static_cast<std::uint64_t>(round) + 1,
                           static_cast<std::uint64_t>(r));
            auto& run = runs[static_cast<std::size_t>(r)];
            run.v = rng.unit_vector<Scalar>(t.k());
            detail::power_iterate(t, run, opts.iters, opts.stop_tol);
          }
        },
        workers);

    const detail::PowerRun<Scalar>* best = nullptr;
    for (const auto& run : runs) {
      if (!(run.value >= 0)) continue;  // negative or NaN
      if (best == nullptr || run.value > best->value) best = &run;
    }
    if (best == nullptr || !(best->value > static_cast<Scalar>(opts.deflation_floor))) {
      throw Error(ErrorKind::kDegenerateComponent,
                  "tensor component " + std::to_string(round) +
                      " has no positive eigenvalue above the deflation floor",
                  round);
    }
    detail::PowerRun<Scalar> polished = *best;
    detail::power_iterate(t, polished, opts.iters, opts.stop_tol);
    if (!(polished.value > static_cast<Scalar>(opts.deflation_floor))) {
      throw Error(ErrorKind::kDegenerateComponent,
                  "tensor component " + std::to_string(round) + " collapsed while polishing",
                  round);
    }
    t.add_rank_one(-polished.value, polished.v);
    pairs.push_back({polished.value, std::move(polished.v)});
  }
  return pairs;
}

/// Sum of lambda_k v_k^{(x)3}.
template <typename Scalar>
SymmetricTensor3<Scalar> reconstruct(const std::vector<TensorEigenpair<Scalar>>& pairs,
                                     Eigen::Index k) {
  SymmetricTensor3<Scalar> out(k);
  for (const auto& p : pairs) out.add_rank_one(p.lambda, p.vector);
  return out;
}

}  // namespace speccf

#endif  // SPECCF_TENSOR_HPP
