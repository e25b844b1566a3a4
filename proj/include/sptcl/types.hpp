#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "sptcl/common.hpp"

namespace sptcl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = Eigen::VectorXi;
using Index = Eigen::Index;

/// Sentinel for "no label" inside a label vector.
inline constexpr int kUnlabeled = -1;

/// Features for one domain, column per sample (m features x n samples),
/// with optional integer labels in [0, class_count) or kUnlabeled.
struct Dataset {
  Matrix features;
  std::optional<Labels> labels;
  int class_count = 0;

  Index dim() const { return features.rows(); }
  Index size() const { return features.cols(); }
};

inline void validate(const Dataset& ds) {
  if (ds.size() < 1 || ds.dim() < 1)
    throw Error(ErrorCode::dimension_mismatch,
                "dataset must have at least one sample and one feature");
  if (!ds.features.allFinite())
    throw Error(ErrorCode::non_finite_value, "dataset features contain a non-finite value");
  if (ds.labels) {
    if (ds.labels->size() != ds.size())
      throw Error(ErrorCode::dimension_mismatch,
                  "label vector length " + std::to_string(ds.labels->size()) +
                      " does not match sample count " + std::to_string(ds.size()));
    for (Index i = 0; i < ds.labels->size(); ++i) {
      int y = (*ds.labels)(i);
      if (y != kUnlabeled && (y < 0 || y >= ds.class_count))
        throw Error(ErrorCode::class_out_of_range,
                    "label " + std::to_string(y) + " at index " + std::to_string(i) +
                        " outside [0, " + std::to_string(ds.class_count) + ")");
    }
  }
}

enum class KernelKind { none, linear, rbf };

/// Kernel choice for the solver. kind == none selects the primal (linear
/// weight) solver; linear/rbf select the Gram-matrix solver. For rbf, a
/// missing gamma means "resolve by the median pairwise-distance heuristic".
struct KernelSpec {
  KernelKind kind = KernelKind::none;
  std::optional<double> gamma;
};

enum class Ablation { full, no_spl, hard_label };

struct Hyperparams {
  double r = 1.1;          // probability exponent of the prudent loss, >= 1
  double eta = 1.0;        // classifier complexity regularizer, > 0
  double rho = 1.0;        // manifold regularizer, >= 0
  int k_neighbors = 5;     // affinity graph neighborhood size
  KernelSpec kernel{};
  int outer_iters = 10;    // length of the self-paced schedule, >= 2
  int inner_iters = 10;    // max alternating passes per outer iteration
  double inner_tol = 1e-5; // relative objective tolerance for the inner loop
  double q_floor = 1e-12;  // floor applied to squared residuals before inversion
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::full;
};

inline void validate(const Hyperparams& hp) {
  if (hp.r < 1.0) throw Error(ErrorCode::invalid_config, "r must be >= 1");
  if (!(hp.eta > 0.0)) throw Error(ErrorCode::invalid_config, "eta must be > 0");
  if (hp.rho < 0.0) throw Error(ErrorCode::invalid_config, "rho must be >= 0");
  if (hp.k_neighbors < 1) throw Error(ErrorCode::invalid_config, "k_neighbors must be >= 1");
  if (hp.outer_iters < 2) throw Error(ErrorCode::invalid_config, "outer_iters must be >= 2");
  if (hp.inner_iters < 1) throw Error(ErrorCode::invalid_config, "inner_iters must be >= 1");
  if (hp.inner_tol < 0.0) throw Error(ErrorCode::invalid_config, "inner_tol must be >= 0");
  if (!(hp.q_floor > 0.0)) throw Error(ErrorCode::invalid_config, "q_floor must be > 0");
  if (hp.kernel.kind == KernelKind::rbf && hp.kernel.gamma && !(*hp.kernel.gamma > 0.0))
    throw Error(ErrorCode::invalid_config, "rbf gamma must be > 0");
}

/// Label corruption: each label is independently replaced, with probability
/// p_noise, by a class drawn uniformly from the other class_count - 1 classes.
struct NoiseSpec {
  double p_noise = 0.0;
  std::uint64_t seed = 0;
};

inline void validate(const NoiseSpec& spec) {
  if (spec.p_noise < 0.0 || spec.p_noise > 1.0)
    throw Error(ErrorCode::invalid_config, "p_noise must lie in [0, 1]");
}

/// Desk-scale stand-in for a cross-domain image task: Gaussian class clusters,
/// where the source covers shared + outlier classes and the target covers the
/// shared classes only, translated by a global domain-shift vector.
struct SyntheticSpec {
  int shared_classes = 3;
  int outlier_classes = 3;
  int source_per_class = 100;
  int target_per_class = 50;
  int dim = 12;
  double separation = 1.4;   // scale of the class centers
  double noise = 1.0;        // within-cluster standard deviation
  double domain_shift = 2.5; // norm of the source-to-target mean shift
  std::uint64_t seed = 0;
};

inline void validate(const SyntheticSpec& spec) {
  if (spec.shared_classes < 1)
    throw Error(ErrorCode::invalid_config, "shared_classes must be >= 1");
  if (spec.outlier_classes < 0)
    throw Error(ErrorCode::invalid_config, "outlier_classes must be >= 0");
  if (spec.source_per_class < 1 || spec.target_per_class < 1)
    throw Error(ErrorCode::invalid_config, "per-class sample counts must be >= 1");
  if (spec.dim < 1) throw Error(ErrorCode::invalid_config, "dim must be >= 1");
  if (!(spec.separation > 0.0) || !(spec.noise > 0.0))
    throw Error(ErrorCode::invalid_config, "separation and noise must be > 0");
  if (spec.domain_shift < 0.0)
    throw Error(ErrorCode::invalid_config, "domain_shift must be >= 0");
}

}  // namespace sptcl
