#pragma once

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <vector>

#include "sptcl/types.hpp"

namespace sptcl {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric cosine kNN affinity over target samples with its degree vector
/// and normalized Laplacian D^{-1/2} (D - M) D^{-1/2}. Rows and columns of
/// isolated nodes (degree zero) are identically zero.
struct AffinityGraph {
  SparseMatrix M;
  Vector degrees;
  SparseMatrix L_norm;
};

/// The Laplacian padded to the full sample ordering [source | target]:
/// L = diag(0_{ns x ns}, L_norm), so source columns never feel the manifold term.
struct PaddedLaplacian {
  SparseMatrix L;
  Index n_source = 0;
};

/// Builds the OR-rule kNN graph: M_ij = cos(x_i, x_j) when either sample is
/// among the other's k nearest neighbors (cosine descending, self excluded,
/// ties to the lower index), else 0. Negative cosines are clamped to zero,
/// which keeps the Laplacian positive semidefinite.
inline AffinityGraph build_affinity(const Matrix& Xt, int k) {
  const Index nt = Xt.cols();
  if (nt < 1) throw Error(ErrorCode::dimension_mismatch, "affinity graph needs >= 1 sample");
  if (k < 1) throw Error(ErrorCode::invalid_config, "k must be >= 1");

  Vector norms = Xt.colwise().norm();
  for (Index i = 0; i < nt; ++i)
    if (norms(i) == 0.0)
      throw Error(ErrorCode::degenerate_input,
                  "zero-norm sample at target index " + std::to_string(i) +
                      ": cosine similarity undefined");

  Matrix unit = Xt.array().rowwise() / norms.transpose().array();
  Matrix cosine = unit.transpose() * unit;

  const Index kk = std::min<Index>(k, nt - 1);
  std::vector<std::vector<Index>> neighbors(nt);
  std::vector<Index> order(nt);
  for (Index i = 0; i < nt; ++i) {
    order.resize(nt);
    std::iota(order.begin(), order.end(), Index{0});
    order.erase(order.begin() + i);
    std::partial_sort(order.begin(), order.begin() + kk, order.end(),
                      [&](Index a, Index b) {
                        double ca = cosine(i, a), cb = cosine(i, b);
                        return ca != cb ? ca > cb : a < b;
                      });
    neighbors[i].assign(order.begin(), order.begin() + kk);
  }

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacent(nt, nt);
  adjacent.setConstant(false);
  for (Index i = 0; i < nt; ++i)
    for (Index j : neighbors[i]) adjacent(i, j) = adjacent(j, i) = true;

  // one weight per unordered pair keeps M bitwise symmetric
  std::vector<Eigen::Triplet<double>> entries;
  for (Index j = 0; j < nt; ++j)
    for (Index i = 0; i < j; ++i) {
      if (!adjacent(i, j)) continue;
      double w = std::clamp(cosine(i, j), 0.0, 1.0);
      if (w > 0.0) {
        entries.emplace_back(i, j, w);
        entries.emplace_back(j, i, w);
      }
    }

  AffinityGraph g;
  g.M.resize(nt, nt);
  g.M.setFromTriplets(entries.begin(), entries.end());
  g.degrees = g.M * Vector::Ones(nt);

  std::vector<Eigen::Triplet<double>> lap;
  for (Index i = 0; i < nt; ++i)
    if (g.degrees(i) > 0.0) lap.emplace_back(i, i, 1.0);
  for (int outer = 0; outer < g.M.outerSize(); ++outer)
    for (SparseMatrix::InnerIterator it(g.M, outer); it; ++it)
      lap.emplace_back(it.row(), it.col(),
                       -it.value() / std::sqrt(g.degrees(it.row()) * g.degrees(it.col())));
  g.L_norm.resize(nt, nt);
  g.L_norm.setFromTriplets(lap.begin(), lap.end());
  return g;
}

inline PaddedLaplacian pad_laplacian(const AffinityGraph& g, Index n_source) {
  const Index nt = g.L_norm.rows();
  PaddedLaplacian padded;
  padded.n_source = n_source;
  padded.L.resize(n_source + nt, n_source + nt);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(g.L_norm.nonZeros()));
  for (int outer = 0; outer < g.L_norm.outerSize(); ++outer)
    for (SparseMatrix::InnerIterator it(g.L_norm, outer); it; ++it)
      entries.emplace_back(it.row() + n_source, it.col() + n_source, it.value());
  padded.L.setFromTriplets(entries.begin(), entries.end());
  return padded;
}

/// Debug dump of the affinity matrix as coordinate-list text, `i j value` per line.
inline void dump_affinity(std::ostream& out, const AffinityGraph& g) {
  char buf[40];
  for (int outer = 0; outer < g.M.outerSize(); ++outer)
    for (SparseMatrix::InnerIterator it(g.M, outer); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
}

}  // namespace sptcl
