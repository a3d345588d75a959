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

#ifndef SPECCF_WHITENING_HPP
#define SPECCF_WHITENING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "speccf/error.hpp"
#include "speccf/moments.hpp"
#include "speccf/rng.hpp"

namespace speccf {

struct SymmetricEigenpairs {
  Eigen::VectorXd values;     // descending
  Eigen::MatrixXd vectors;    // orthonormal columns
  Eigen::VectorXd residuals;  // |A w - nu w| per pair
  int restarts = 0;
  std::int64_t matvecs = 0;
  bool converged = false;
};

struct EigOptions {
  double tol = 1e-10;
  int max_iter = 0;  // restart cycles; 0 means 300 * K
  std::uint64_t seed = 42;
  Index basis_size = 0;  // 0 means min(D, 2K + 16)
};

namespace detail {

/// Orthogonalizes the columns of `block` against the orthonormal columns of
/// `basis` (two classical Gram-Schmidt passes), then orthonormalizes the
/// block itself. Columns that lose all but a 1e-10 fraction of their norm
/// are dropped as linearly dependent.
inline Eigen::MatrixXd orthonormal_extension(const Eigen::MatrixXd& basis,
                                             Eigen::MatrixXd block) {
  std::vector<Index> keep;
  for (Index c = 0; c < block.cols(); ++c) {
    auto col = block.col(c);
    const double before = col.norm();
    if (!(before > 0.0)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() > 0) col -= basis * (basis.transpose() * col);
      for (Index p : keep) col -= block.col(p) * block.col(p).dot(col);
    }
    const double after = col.norm();
    if (after <= 1e-10 * before) continue;
    col /= after;
    keep.push_back(c);
  }
  Eigen::MatrixXd out(block.rows(), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Index>(i)) = block.col(keep[i]);
  return out;
}

inline void append_columns(Eigen::MatrixXd& m, const Eigen::MatrixXd& extra) {
  const Index old = m.cols();
  m.conservativeResize(Eigen::NoChange, old + extra.cols());
  m.rightCols(extra.cols()) = extra;
}

/// Flips each column so that its largest-magnitude entry is positive.
inline void canonicalize_signs(Eigen::MatrixXd& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0.0) v.col(c) = -v.col(c);
  }
}

}  // namespace detail

/// K algebraically largest eigenpairs of a symmetric operator by thick-
/// restarted block Krylov iteration with full reorthogonalization and
/// Rayleigh-Ritz extraction. `a` needs rows() and a product with a dense
/// matrix (Eigen sparse and dense matrices both qualify).
///
/// Converged when every pair satisfies |A w - nu w| <= tol * |nu_1|.
/// Throws kRankDeficient (detail = achieved rank) when fewer than K
/// eigenvalues exceed tol * |nu_1|.
template <typename Operator>
SymmetricEigenpairs topk_symmetric_eigs(const Operator& a, Index k, const EigOptions& opts = {}) {
  const Index n = a.rows();
  if (k < 1 || k > n) {
    throw Error(ErrorKind::kInvalidArgument,
                "eigenpair count must be in [1, " + std::to_string(n) + "]");
  }
  const Index m_max =
      std::min(n, std::max(k + 1, opts.basis_size > 0 ? opts.basis_size : 2 * k + 16));
  const Index keep = std::min(m_max, k + (m_max - k) / 2);
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(300 * k);

  SymmetricEigenpairs out;
  CounterRng rng(opts.seed, 0x6569);
  Eigen::MatrixXd start(n, k);
  for (Index c = 0; c < k; ++c) {
    for (Index r = 0; r < n; ++r) start(r, c) = rng.normal();
  }
  Eigen::MatrixXd v = detail::orthonormal_extension(Eigen::MatrixXd(n, 0), start);
  Eigen::MatrixXd av = a * v;
  out.matvecs += v.cols();
  Eigen::MatrixXd pending;  // block whose image seeds the next expansion

  Eigen::VectorXd theta;
  Eigen::MatrixXd y, ay;
  Eigen::VectorXd resid(k);
  for (int iter = 0; iter < max_iter; ++iter) {
    out.restarts = iter + 1;
    Eigen::MatrixXd last = pending.cols() > 0 ? pending : Eigen::MatrixXd(av);
    if (pending.cols() > 0) {
      Eigen::MatrixXd ext = detail::orthonormal_extension(v, pending);
      if (ext.cols() > m_max - v.cols()) ext.conservativeResize(Eigen::NoChange, m_max - v.cols());
      detail::append_columns(v, ext);
      Eigen::MatrixXd aext = a * ext;
      out.matvecs += ext.cols();
      detail::append_columns(av, aext);
      last = ext.cols() > 0 ? aext : Eigen::MatrixXd(av);
    }
    while (v.cols() < m_max && last.cols() > 0) {
      Eigen::MatrixXd ext = detail::orthonormal_extension(v, last);
      if (ext.cols() == 0) break;  // invariant subspace
      if (ext.cols() > m_max - v.cols()) ext.conservativeResize(Eigen::NoChange, m_max - v.cols());
      detail::append_columns(v, ext);
      last = a * ext;
      out.matvecs += ext.cols();
      detail::append_columns(av, last);
    }

    Eigen::MatrixXd h = v.transpose() * av;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Index m = h.rows();
    // reverse to descending order
    Eigen::MatrixXd s = es.eigenvectors().rowwise().reverse();
    theta = es.eigenvalues().reverse();
    const Index p = std::min(m, std::max(keep, k));
    y = v * s.leftCols(p);
    ay = av * s.leftCols(p);

    const double scale = std::abs(theta(0));
    std::vector<Index> open;
    for (Index i = 0; i < k; ++i) {
      resid(i) = (ay.col(i) - theta(i) * y.col(i)).norm();
      if (resid(i) > opts.tol * scale) open.push_back(i);
    }
    const bool exhausted = v.cols() == n;
    if (open.empty() || exhausted || scale == 0.0) {
      out.converged = true;
      break;
    }
    pending.resize(n, static_cast<Index>(open.size()));
    for (std::size_t i = 0; i < open.size(); ++i) {
      pending.col(static_cast<Index>(i)) = ay.col(open[i]) - theta(open[i]) * y.col(open[i]);
    }
    v = y;
    av = ay;
  }

  out.values = theta.head(k);
  out.vectors = y.leftCols(k);
  out.residuals = resid;
  // Renormalize against accumulated rounding in the Ritz rotation.
  for (Index c = 0; c < k; ++c) out.vectors.col(c).normalize();
  detail::canonicalize_signs(out.vectors);

  const double cutoff = opts.tol * std::abs(out.values(0));
  Index rank = 0;
  while (rank < k && out.values(rank) > cutoff) ++rank;
  if (rank < k) {
    throw Error(ErrorKind::kRankDeficient,
                "only " + std::to_string(rank) + " of " + std::to_string(k) +
                    " eigenvalues exceed tol * |nu_1|; achieved rank " + std::to_string(rank),
                rank);
  }
  return out;
}

/// Top-K eigenpairs of the pairwise moment.
inline SymmetricEigenpairs topk_eig(const PairwiseMoment& m2, Index k, double tol = 1e-10,
                                    int max_iter = 0, std::uint64_t seed = 42) {
  EigOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.seed = seed;
  return topk_symmetric_eigs(m2.entries, k, opts);
}

/// W = Omega Sigma^{-1/2} and W+ = W (W^T W)^{-1} = Omega Sigma^{1/2}.
struct WhiteningTransform {
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;
  Eigen::MatrixXd w;
  Eigen::MatrixXd w_pinv;

  Index k() const { return eigvals.size(); }
  Index d() const { return eigvecs.rows(); }
};

template <typename DerivedVals, typename DerivedVecs>
WhiteningTransform build_whitener(const Eigen::MatrixBase<DerivedVals>& eigvals,
                                  const Eigen::MatrixBase<DerivedVecs>& eigvecs) {
  if (eigvals.size() != eigvecs.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "eigenvalue count != eigenvector count");
  }
  for (Index i = 0; i < eigvals.size(); ++i) {
    if (!(eigvals(i) > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "eigenvalue " + std::to_string(i) + " is not positive; whitening undefined",
                  i);
    }
  }
  WhiteningTransform wt;
  wt.eigvals = eigvals;
  wt.eigvecs = eigvecs;
  wt.w = eigvecs * eigvals.cwiseSqrt().cwiseInverse().asDiagonal();
  wt.w_pinv = eigvecs * eigvals.cwiseSqrt().asDiagonal();
  return wt;
}

inline WhiteningTransform build_whitener(const SymmetricEigenpairs& eig) {
  return build_whitener(eig.values, eig.vectors);
}

}  // namespace speccf

#endif  // SPECCF_WHITENING_HPP
