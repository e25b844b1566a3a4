#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sptcl/types.hpp"

namespace sptcl {

/// Dense symmetric Gram matrix over all training samples [X_s, X_t] in
/// source-then-target order, with the kernel parameters actually used.
struct GramMatrix {
  Matrix K;
  KernelKind kind = KernelKind::linear;
  double gamma = 0.0;  // meaningful only for rbf
};

/// Median pairwise Euclidean distance, estimated from all distinct pairs when
/// there are at most max_pairs of them and from a seeded sample otherwise.
inline double median_pairwise_distance(const Matrix& X, std::uint64_t seed,
                                       std::size_t max_pairs = 2000) {
  const Index n = X.cols();
  if (n < 2)
    throw Error(ErrorCode::degenerate_input,
                "median distance heuristic needs at least two samples");
  std::vector<double> dists;
  const std::size_t total = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (total <= max_pairs) {
    dists.reserve(total);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        dists.push_back((X.col(i) - X.col(j)).norm());
  } else {
    auto rng = make_rng(seed, kSeedRoleKernelPairs);
    dists.reserve(max_pairs);
    while (dists.size() < max_pairs) {
      Index i = uniform_below(rng, n);
      Index j = uniform_below(rng, n - 1);
      if (j >= i) ++j;
      dists.push_back((X.col(i) - X.col(j)).norm());
    }
  }
  auto mid = dists.begin() + dists.size() / 2;
  std::nth_element(dists.begin(), mid, dists.end());
  double median = *mid;
  if (dists.size() % 2 == 0) {
    double lower = *std::max_element(dists.begin(), mid);
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0))
    throw Error(ErrorCode::degenerate_input,
                "median pairwise distance is zero; all sampled points coincide");
  return median;
}

/// Gram matrix construction. linear: K = X^T X. rbf: K_ij =
/// exp(-gamma ||x_i - x_j||^2), where a missing gamma resolves to
/// 1 / (2 median^2) via median_pairwise_distance under the given seed.
inline GramMatrix gram(const Matrix& X, const KernelSpec& spec, std::uint64_t seed = 0) {
  if (X.cols() < 1) throw Error(ErrorCode::dimension_mismatch, "gram needs >= 1 sample");
  GramMatrix out;
  if (spec.kind == KernelKind::rbf) {
    out.kind = KernelKind::rbf;
    if (spec.gamma) {
      if (!(*spec.gamma > 0.0))
        throw Error(ErrorCode::invalid_config, "rbf gamma must be > 0");
      out.gamma = *spec.gamma;
    } else {
      double med = median_pairwise_distance(X, seed);
      out.gamma = 1.0 / (2.0 * med * med);
    }
    Matrix inner = X.transpose() * X;
    Vector sq = inner.diagonal();
    Matrix sqdist = ((-2.0 * inner).colwise() + sq).rowwise() + sq.transpose();
    out.K = (-out.gamma * sqdist.array()).exp();
    Matrix sym = out.K.selfadjointView<Eigen::Lower>();  // enforce exact symmetry
    out.K = std::move(sym);
    out.K.diagonal().setOnes();
  } else {
    out.kind = KernelKind::linear;
    Matrix inner = X.transpose() * X;
    out.K = inner.selfadjointView<Eigen::Lower>();
  }
  return out;
}

/// Kernel evaluations between training samples (columns of X_train) and new
/// samples: the n_train x n_new block used for out-of-sample prediction.
inline Matrix gram_cross(const Matrix& X_train, const Matrix& X_new, KernelKind kind,
                         double gamma = 0.0) {
  if (X_train.rows() != X_new.rows())
    throw Error(ErrorCode::dimension_mismatch,
                "feature dimension mismatch between training and new samples");
  if (kind == KernelKind::rbf) {
    Matrix inner = X_train.transpose() * X_new;
    Vector sq_train = X_train.colwise().squaredNorm();
    Vector sq_new = X_new.colwise().squaredNorm();
    return (-gamma * (((-2.0 * inner).colwise() + sq_train).rowwise() + sq_new.transpose()))
        .array()
        .exp();
  }
  return X_train.transpose() * X_new;
}

}  // namespace sptcl
