#pragma once

// Test-only reference implementations: brute-force oracles kept deliberately
// independent of the library's vectorized code paths.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sptcl/sptcl.hpp"

namespace oracle {

using sptcl::Index;
using sptcl::Matrix;
using sptcl::Vector;

// Scalar double-loop version of the prudent loss for one sample column.
inline double column_loss(const Eigen::VectorXd& p, const Eigen::VectorXd& score, double r) {
  double total = 0.0;
  for (Index c = 0; c < p.size(); ++c) {
    double sq = 0.0;
    for (Index k = 0; k < score.size(); ++k) {
      double diff = score(k) - (k == c ? 1.0 : 0.0);
      sq += diff * diff;
    }
    total += std::pow(p(c), r) * sq;
  }
  return total;
}

// Eq.-by-eq scalar evaluation of the full objective in linear mode.
inline double objective_linear(const Matrix& W, const Matrix& P, const Eigen::ArrayXd& v,
                               double lambda, const Matrix& X, const Matrix& L_dense,
                               Index n_source, double r, double eta, double rho) {
  const Index n = X.cols();
  double value = 0.0;
  for (Index i = 0; i < n; ++i) {
    double weight = i < n_source ? v(i) : 1.0;
    value += weight * column_loss(P.col(i), W.transpose() * X.col(i), r);
  }
  value += eta * W.squaredNorm();
  Matrix z = X.transpose() * W;  // n x C predicted scores
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      if (L_dense(a, b) != 0.0) value += rho * L_dense(a, b) * z.row(a).dot(z.row(b));
  for (Index i = 0; i < n_source; ++i) value -= lambda * v(i);
  return value;
}

inline double objective_kernel(const Matrix& W, const Matrix& P, const Eigen::ArrayXd& v,
                               double lambda, const Matrix& K, const Matrix& L_dense,
                               Index n_source, double r, double eta, double rho) {
  const Index n = K.cols();
  double value = 0.0;
  for (Index i = 0; i < n; ++i) {
    double weight = i < n_source ? v(i) : 1.0;
    value += weight * column_loss(P.col(i), W.transpose() * K.col(i), r);
  }
  Matrix kw = K * W;
  for (Index a = 0; a < n; ++a) value += eta * W.row(a).dot(kw.row(a));
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      if (L_dense(a, b) != 0.0) value += rho * L_dense(a, b) * kw.row(a).dot(kw.row(b));
  for (Index i = 0; i < n_source; ++i) value -= lambda * v(i);
  return value;
}

// Value of the selection subproblem sum_i v_i l_i - lambda sum_i v_i.
inline double selection_value(const Eigen::ArrayXd& v, const Vector& losses, double lambda) {
  double value = 0.0;
  for (Index i = 0; i < losses.size(); ++i) value += v(i) * (losses(i) - lambda);
  return value;
}

// Exhaustive minimum of the selection subproblem over all binary vectors.
inline double exhaustive_selection_min(const Vector& losses, double lambda) {
  const Index n = losses.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Eigen::ArrayXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = (mask >> i) & 1 ? 1.0 : 0.0;
    best = std::min(best, selection_value(v, losses, lambda));
  }
  return best;
}

inline double simplex_objective(const Eigen::VectorXd& p, const Eigen::VectorXd& q, double r) {
  double value = 0.0;
  for (Index c = 0; c < p.size(); ++c) value += std::pow(p(c), r) * q(c);
  return value;
}

// Exhaustive grid search over the simplex at resolution 1/steps: enumerates
// all compositions of `steps` into C parts.
inline void grid_search_recurse(Eigen::VectorXd& p, Index c, int remaining, int steps,
                                const Eigen::VectorXd& q, double r, double& best_value,
                                Eigen::VectorXd& best_p) {
  if (c == p.size() - 1) {
    p(c) = static_cast<double>(remaining) / steps;
    double value = simplex_objective(p, q, r);
    if (value < best_value) {
      best_value = value;
      best_p = p;
    }
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    p(c) = static_cast<double>(k) / steps;
    grid_search_recurse(p, c + 1, remaining - k, steps, q, r, best_value, best_p);
  }
}

struct GridResult {
  Eigen::VectorXd p;
  double value;
};

inline GridResult grid_search_simplex(const Eigen::VectorXd& q, double r, int steps = 20) {
  Eigen::VectorXd p(q.size()), best_p(q.size());
  double best_value = std::numeric_limits<double>::infinity();
  grid_search_recurse(p, 0, steps, steps, q, r, best_value, best_p);
  return {best_p, best_value};
}

// Refines a grid optimum by greedy mass exchanges at shrinking step sizes.
// For a separable convex objective over the simplex, no improving pairwise
// exchange means the lattice point is optimal at that resolution.
inline GridResult refine_simplex_minimum(GridResult incumbent, const Eigen::VectorXd& q,
                                         double r, double final_step = 1e-5) {
  const Index C = q.size();
  for (double step = 0.01; step >= final_step * 0.999; step /= 10.0) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (Index from = 0; from < C; ++from) {
        if (incumbent.p(from) < step - 1e-15) continue;
        for (Index to = 0; to < C; ++to) {
          if (to == from) continue;
          Eigen::VectorXd cand = incumbent.p;
          cand(from) -= step;
          cand(to) += step;
          double value = simplex_objective(cand, q, r);
          if (value < incumbent.value - 1e-18) {
            incumbent.p = cand;
            incumbent.value = value;
            improved = true;
          }
        }
      }
    }
  }
  return incumbent;
}

// Central finite differences of a scalar functional of W.
template <typename F>
Matrix fd_gradient(F&& func, Matrix W, double h = 1e-5) {
  Matrix grad(W.rows(), W.cols());
  for (Index i = 0; i < W.rows(); ++i)
    for (Index j = 0; j < W.cols(); ++j) {
      double saved = W(i, j);
      W(i, j) = saved + h;
      double up = func(W);
      W(i, j) = saved - h;
      double down = func(W);
      W(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  return grad;
}

// --- seeded random instance helpers -----------------------------------------

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

inline Eigen::VectorXd random_simplex_column(std::mt19937_64& rng, Index C) {
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd p(C);
  for (Index c = 0; c < C; ++c) p(c) = expo(rng);
  return p / p.sum();
}

// Small random training problem built through the public construction path.
inline std::pair<sptcl::Dataset, sptcl::Dataset> random_domains(std::mt19937_64& rng,
                                                                Index dim, Index ns, Index nt,
                                                                int classes) {
  sptcl::Dataset source, target;
  source.features = random_matrix(rng, dim, ns);
  sptcl::Labels labels(ns);
  for (Index i = 0; i < ns; ++i)
    labels(i) = static_cast<int>(rng() % static_cast<std::uint64_t>(classes));
  source.labels = labels;
  source.class_count = classes;
  target.features = random_matrix(rng, dim, nt);
  target.class_count = classes;
  return {source, target};
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("sptcl_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace oracle
