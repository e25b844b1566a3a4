#pragma once

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "sptcl/datamodel.hpp"
#include "sptcl/eval.hpp"
#include "sptcl/graph.hpp"
#include "sptcl/kernel.hpp"
#include "sptcl/types.hpp"

namespace sptcl {

enum class SolverMode { linear, kernel };

/// All free variables of the alternating optimization. W is m x C in linear
/// mode and n x C in kernel mode; P stacks the source and target class
/// probability columns [P_s | P_t]; v selects source examples; lambda is the
/// current self-paced threshold.
struct ModelState {
  Matrix W;
  Eigen::ArrayXd v;
  Matrix P;
  double lambda = 0.0;
  SolverMode mode = SolverMode::linear;
};

/// Immutable per-fit data: stacked features, graph Laplacian padded to the
/// [source | target] ordering, and the Gram matrix in kernel mode.
struct Problem {
  Matrix X;  // m x (ns + nt), source columns first
  Index n_source = 0;
  Index n_target = 0;
  int class_count = 0;
  std::optional<GramMatrix> gram;
  PaddedLaplacian laplacian;
  Hyperparams hp;

  bool kernel_mode() const { return gram.has_value(); }
  Index n_total() const { return n_source + n_target; }
};

/// Classifier outputs for every training sample, one column each: W^T X in
/// linear mode, W^T K in kernel mode.
inline Matrix model_scores(const ModelState& state, const Problem& prob) {
  return state.mode == SolverMode::kernel ? state.W.transpose() * prob.gram->K
                                          : state.W.transpose() * prob.X;
}

/// Q with q_ci = ||score column i - e_c||^2, clamped at zero against roundoff.
inline Matrix squared_residuals(const Matrix& scores) {
  Matrix q = -2.0 * scores;
  q.rowwise() += scores.colwise().squaredNorm();
  q.array() += 1.0;
  return q.cwiseMax(0.0);
}

/// The diagonal pieces of the weighted quadratic loss: u = [v, 1], F = P^r U,
/// s_i = sum_c F_ci. Columns of excluded samples are zeroed through u.
struct WeightedLossTerms {
  Vector u;  // n
  Matrix F;  // C x n
  Vector s;  // n
};

inline WeightedLossTerms weighted_loss_terms(const Matrix& P, const Eigen::ArrayXd& v,
                                             Index n_target, double r) {
  const Index n = P.cols();
  WeightedLossTerms terms;
  terms.u.resize(n);
  terms.u.head(n - n_target) = v.matrix();
  terms.u.tail(n_target).setOnes();
  terms.F = (r == 1.0 ? P : Matrix(P.array().pow(r))) * terms.u.asDiagonal();
  terms.s = terms.F.colwise().sum();
  return terms;
}

/// Per-source-example prudent loss l_i = sum_c p_ci^r q_ci under the current
/// W and P_s; independent of the selection vector v.
inline Vector per_example_source_loss(const ModelState& state, const Problem& prob) {
  Matrix scores = model_scores(state, prob);
  Matrix q = squared_residuals(scores.leftCols(prob.n_source));
  Eigen::ArrayXXd p = state.P.leftCols(prob.n_source).array();
  if (prob.hp.r != 1.0) p = p.pow(prob.hp.r);
  return (p * q.array()).colwise().sum();
}

/// Closed-form selection: keep exactly the examples whose loss is strictly
/// below the pace threshold.
inline Eigen::ArrayXd v_step(const Vector& losses, double lambda) {
  Eigen::ArrayXd v(losses.size());
  for (Index i = 0; i < losses.size(); ++i) v(i) = losses(i) < lambda ? 1.0 : 0.0;
  return v;
}

/// Threshold such that v_step keeps `keep` examples when the order statistics
/// around the cut are distinct: 0 for none, max+1 for all, otherwise the
/// midpoint of the keep-th and (keep+1)-th smallest losses.
inline double pace_lambda_for_count(const Vector& losses, Index keep) {
  const Index n = losses.size();
  if (keep <= 0) return 0.0;
  if (keep >= n) return losses.maxCoeff() + 1.0;
  std::vector<double> sorted(losses.data(), losses.data() + n);
  std::nth_element(sorted.begin(), sorted.begin() + keep - 1, sorted.end());
  double at = sorted[keep - 1];
  double next = *std::min_element(sorted.begin() + keep, sorted.end());
  return 0.5 * (at + next);
}

/// Keep-fraction form: keep = ceil(tau * n).
inline double pace_lambda(const Vector& losses, double tau) {
  const Index n = losses.size();
  Index keep;
  if (tau >= 1.0)
    keep = n;
  else if (tau <= 0.0)
    keep = 0;
  else
    keep = std::min<Index>(n, static_cast<Index>(std::ceil(tau * static_cast<double>(n))));
  return pace_lambda_for_count(losses, keep);
}

/// Fallback when duplicated losses straddle the threshold: pick exactly
/// `keep` examples ordered by (loss, index).
inline Eigen::ArrayXd select_smallest(const Vector& losses, Index keep) {
  std::vector<Index> order(losses.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return losses(a) != losses(b) ? losses(a) < losses(b) : a < b;
  });
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(losses.size());
  for (Index i = 0; i < std::min<Index>(keep, losses.size()); ++i) v(order[i]) = 1.0;
  return v;
}

/// Per-column simplex minimizer of sum_c p_c^r q_c. r = 1 puts all mass on the
/// smallest residual (ties to the lowest class); r > 1 uses the stationary
/// point p_c proportional to (1/q_c)^{1/(r-1)}, with residuals floored at
/// q_floor before inversion. Applied to every column; excluded samples are
/// neutralized later through u.
inline Matrix p_step(const Matrix& Q, double r, double q_floor) {
  const Index C = Q.rows(), n = Q.cols();
  Matrix P(C, n);
  if (r == 1.0) {
    P.setZero();
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      for (Index c = 1; c < C; ++c)
        if (Q(c, i) < Q(best, i)) best = c;
      P(best, i) = 1.0;
    }
    return P;
  }
  // work in log space: (1/q)^{1/(r-1)} overflows quickly as r -> 1
  const double inv = 1.0 / (r - 1.0);
  for (Index i = 0; i < n; ++i) {
    Eigen::ArrayXd logw = -inv * Q.col(i).array().max(q_floor).log();
    logw -= logw.maxCoeff();
    Eigen::ArrayXd w = logw.exp();
    P.col(i) = w / w.sum();
  }
  return P;
}

/// Ridge normal equations of the weighted joint loss in the primal:
/// (X (S + rho L) X^T + eta I) W = X F^T, solved by LDLT. The system matrix is
/// symmetric positive definite for eta > 0.
inline Matrix w_step_linear(const Matrix& X, const Matrix& F, const Vector& s,
                            const PaddedLaplacian& laplacian, double eta, double rho) {
  Matrix A = X * s.asDiagonal() * X.transpose();
  if (rho > 0.0) A += rho * (X * (laplacian.L * X.transpose()));
  A.diagonal().array() += eta;
  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorCode::numeric_failure, "LDLT factorization failed in the W-step");
  Matrix W = ldlt.solve(X * F.transpose());
  if (!W.allFinite())
    throw Error(ErrorCode::numeric_failure, "non-finite solution in the linear W-step");
  return W;
}

/// Kernelized counterpart: ((S + rho L) K + eta I) W = F^T. The system is not
/// symmetric, so it is solved by partial-pivot LU and the residual is checked.
inline Matrix w_step_kernel(const Matrix& K, const Matrix& F, const Vector& s,
                            const PaddedLaplacian& laplacian, double eta, double rho) {
  Matrix A = s.asDiagonal() * K;
  if (rho > 0.0) A += rho * (laplacian.L * K);
  A.diagonal().array() += eta;
  Matrix rhs = F.transpose();
  Matrix W = Eigen::PartialPivLU<Matrix>(A).solve(rhs);
  double scale = std::max(rhs.norm(), 1.0);
  if (!W.allFinite() || (A * W - rhs).norm() > 1e-6 * scale)
    throw Error(ErrorCode::numeric_failure, "singular system in the kernel W-step");
  return W;
}

/// Full model objective: selected source loss + target loss + complexity and
/// manifold regularizers + the self-paced term -lambda sum(v). Kernel mode
/// uses eta Tr(W^T K W) + rho Tr(W^T K L K W) for the regularizers.
inline double objective(const ModelState& state, const Problem& prob) {
  const Hyperparams& hp = prob.hp;
  Matrix scores = model_scores(state, prob);
  Matrix q = squared_residuals(scores);
  Eigen::ArrayXXd p = state.P.array();
  if (hp.r != 1.0) p = p.pow(hp.r);
  Vector col_loss = (p * q.array()).colwise().sum();
  double loss = col_loss.tail(prob.n_target).sum() +
                (col_loss.head(prob.n_source).array() * state.v).sum();

  double reg;
  if (state.mode == SolverMode::kernel) {
    Matrix kw = prob.gram->K * state.W;
    reg = hp.eta * (state.W.array() * kw.array()).sum() +
          hp.rho * (kw.array() * (prob.laplacian.L * kw).array()).sum();
  } else {
    Matrix z = prob.X.transpose() * state.W;
    reg = hp.eta * state.W.squaredNorm() +
          hp.rho * (z.array() * (prob.laplacian.L * z).array()).sum();
  }
  return loss + reg - state.lambda * state.v.sum();
}

/// Keep fractions tau_t = (T_o - t) / (T_o - 1) for t = 1..T_o: all source
/// examples at the first outer iteration, none at the last.
struct PaceSchedule {
  int outer_iters = 10;

  double tau(int t) const {
    return static_cast<double>(outer_iters - t) / static_cast<double>(outer_iters - 1);
  }
  /// Exact ceil(tau_t * n_source) in integer arithmetic.
  Index keep_count(int t, Index n_source) const {
    const Index num = n_source * static_cast<Index>(outer_iters - t);
    const Index den = outer_iters - 1;
    return (num + den - 1) / den;
  }
};

struct FitOptions {
  std::optional<Labels> true_target_labels;   // enables target_accuracy records
  std::optional<Labels> clean_source_labels;  // enables source_accuracy records
  /// Called after each outer iteration with the iteration index, the state,
  /// and the C x n training score matrix.
  std::function<void(int, const ModelState&, const Matrix&)> on_outer_iteration;
};

struct FitResult {
  ModelState state;
  std::vector<IterationRecord> records;
  Labels predictions;  // target labels from the final classifier
};

/// Row index of the largest entry per column, ties to the lowest class index.
inline Labels argmax_labels(const Matrix& scores) {
  Labels out(scores.cols());
  for (Index i = 0; i < scores.cols(); ++i) {
    Index best = 0;
    for (Index c = 1; c < scores.rows(); ++c)
      if (scores(c, i) > scores(best, i)) best = c;
    out(i) = static_cast<int>(best);
  }
  return out;
}

/// Assembles the immutable training inputs: stacked features, affinity graph
/// over the target samples, and the Gram matrix when a kernel is selected.
inline Problem make_problem(const Dataset& source, const Dataset& target,
                            const Hyperparams& hp) {
  validate(hp);
  validate(source);
  validate(target);
  if (!source.labels)
    throw Error(ErrorCode::invalid_config, "fit needs a labeled source dataset");
  for (Index i = 0; i < source.labels->size(); ++i)
    if ((*source.labels)(i) == kUnlabeled)
      throw Error(ErrorCode::invalid_config,
                  "unlabeled source sample at index " + std::to_string(i));
  if (source.dim() != target.dim())
    throw Error(ErrorCode::dimension_mismatch,
                "source dim " + std::to_string(source.dim()) + " vs target dim " +
                    std::to_string(target.dim()));

  Problem prob;
  prob.n_source = source.size();
  prob.n_target = target.size();
  prob.class_count = source.class_count;
  prob.hp = hp;
  prob.X.resize(source.dim(), prob.n_total());
  prob.X << source.features, target.features;
  prob.laplacian = pad_laplacian(build_affinity(target.features, hp.k_neighbors),
                                 prob.n_source);
  if (hp.kernel.kind != KernelKind::none)
    prob.gram = gram(prob.X, hp.kernel, derive_seed(hp.seed, kSeedRoleKernelPairs));
  return prob;
}

/// The full alternating optimization: initialize P_s with the (possibly noisy)
/// one-hot source labels and P_t with zeros, then walk the pace schedule. Each
/// outer iteration re-selects source examples against the current losses and
/// runs the inner W/P alternation to convergence. At the final iteration all
/// source examples are excluded and the classifier belongs to the target.
inline FitResult fit(const Dataset& source, const Dataset& target, const Hyperparams& hp,
                     const FitOptions& opts = {}) {
  Problem prob = make_problem(source, target, hp);
  const Index ns = prob.n_source, nt = prob.n_target;
  const int C = prob.class_count;

  ModelState st;
  st.mode = prob.kernel_mode() ? SolverMode::kernel : SolverMode::linear;
  st.W = Matrix::Zero(prob.kernel_mode() ? prob.n_total() : prob.X.rows(), C);
  st.P.resize(C, prob.n_total());
  st.P << one_hot(*source.labels, C), Matrix::Zero(C, nt);
  st.v = Eigen::ArrayXd::Ones(ns);
  const double p_step_r = hp.ablation == Ablation::hard_label ? 1.0 : hp.r;

  PaceSchedule schedule{hp.outer_iters};
  FitResult result;
  result.records.reserve(hp.outer_iters);

  for (int t = 1; t <= hp.outer_iters; ++t) {
    if (hp.ablation == Ablation::no_spl) {
      st.v.setOnes();
      st.lambda = 0.0;
    } else {
      Vector losses = per_example_source_loss(st, prob);
      const Index keep = schedule.keep_count(t, ns);
      st.lambda = pace_lambda_for_count(losses, keep);
      st.v = v_step(losses, st.lambda);
      if (static_cast<Index>(st.v.sum()) != keep) st.v = select_smallest(losses, keep);
    }

    double prev = objective(st, prob);
    double obj = prev;
    for (int pass = 0; pass < hp.inner_iters; ++pass) {
      auto terms = weighted_loss_terms(st.P, st.v, nt, hp.r);
      st.W = prob.kernel_mode()
                 ? w_step_kernel(prob.gram->K, terms.F, terms.s, prob.laplacian, hp.eta,
                                 hp.rho)
                 : w_step_linear(prob.X, terms.F, terms.s, prob.laplacian, hp.eta, hp.rho);
      st.P = p_step(squared_residuals(model_scores(st, prob)), p_step_r, hp.q_floor);
      obj = objective(st, prob);
      if (std::abs(prev - obj) < hp.inner_tol * std::abs(prev)) break;
      prev = obj;
    }

    Matrix scores = model_scores(st, prob);
    IterationRecord rec;
    rec.iter = t;
    rec.lambda = st.lambda;
    rec.selected_count = static_cast<long>(st.v.sum());
    rec.objective = obj;
    if (opts.true_target_labels)
      rec.target_accuracy = accuracy(argmax_labels(scores.rightCols(nt)),
                                     *opts.true_target_labels);
    if (opts.clean_source_labels)
      rec.source_accuracy = accuracy(argmax_labels(scores.leftCols(ns)),
                                     *opts.clean_source_labels);
    rec.confidence_histogram = confidence_histogram(st.P.rightCols(nt));
    result.records.push_back(rec);
    if (opts.on_outer_iteration) opts.on_outer_iteration(t, st, scores);
    if (t == hp.outer_iters) result.predictions = argmax_labels(scores.rightCols(nt));
  }
  result.state = std::move(st);
  return result;
}

struct Prediction {
  Labels labels;
  Matrix probabilities;  // C x n, each column on the simplex
};

/// Applies a fitted classifier to new inputs: feature columns in linear mode,
/// Gram columns k(x_train, x_new) in kernel mode. Probabilities come from the
/// same residual-inversion rule the solver uses for P.
inline Prediction predict(const ModelState& state, const Matrix& inputs, double r,
                          double q_floor) {
  if (inputs.rows() != state.W.rows())
    throw Error(ErrorCode::dimension_mismatch,
                "input rows " + std::to_string(inputs.rows()) + " do not match model rows " +
                    std::to_string(state.W.rows()));
  Matrix scores = state.W.transpose() * inputs;
  Prediction pred;
  pred.labels = argmax_labels(scores);
  pred.probabilities = p_step(squared_residuals(scores), r, q_floor);
  return pred;
}

}  // namespace sptcl
