#pragma once

#include <random>
#include <vector>

#include "sptcl/types.hpp"

namespace sptcl {

/// C x n matrix whose i-th column is the standard basis vector of labels(i).
inline Matrix one_hot(const Labels& labels, int class_count) {
  Matrix out = Matrix::Zero(class_count, labels.size());
  for (Index i = 0; i < labels.size(); ++i) {
    int y = labels(i);
    if (y < 0 || y >= class_count)
      throw Error(ErrorCode::class_out_of_range,
                  "label " + std::to_string(y) + " at index " + std::to_string(i) +
                      " outside [0, " + std::to_string(class_count) + ")");
    out(y, i) = 1.0;
  }
  return out;
}

struct NoiseResult {
  Labels labels;
  std::vector<bool> flipped;
};

/// Corrupts labels per NoiseSpec: each label is independently replaced with
/// probability p_noise by a class drawn uniformly from the class_count - 1
/// other classes, so the replacement never equals the original.
inline NoiseResult inject_label_noise(const Labels& labels, int class_count,
                                      const NoiseSpec& spec) {
  validate(spec);
  if (spec.p_noise > 0.0 && class_count < 2)
    throw Error(ErrorCode::invalid_config,
                "label noise needs at least two classes to flip between");
  for (Index i = 0; i < labels.size(); ++i)
    if (labels(i) < 0 || labels(i) >= class_count)
      throw Error(ErrorCode::class_out_of_range,
                  "label " + std::to_string(labels(i)) + " at index " + std::to_string(i) +
                      " outside [0, " + std::to_string(class_count) + ")");

  NoiseResult result{labels, std::vector<bool>(labels.size(), false)};
  auto rng = make_rng(spec.seed, kSeedRoleNoise);
  for (Index i = 0; i < labels.size(); ++i) {
    if (uniform01(rng) >= spec.p_noise) continue;
    // skip the true class so the flip is always a real corruption
    auto pick = uniform_below(rng, class_count - 1);
    int flipped = static_cast<int>(pick >= labels(i) ? pick + 1 : pick);
    result.labels(i) = flipped;
    result.flipped[i] = true;
  }
  return result;
}

/// Keeps only the samples whose labels are in `keep`. Labels stay expressed in
/// the original class indexing and class_count is unchanged: the model's
/// output space remains the full source label space.
inline Dataset subset_classes(const Dataset& ds, const std::vector<int>& keep) {
  if (!ds.labels)
    throw Error(ErrorCode::invalid_config, "subset_classes needs a labeled dataset");
  if (keep.empty())
    throw Error(ErrorCode::invalid_config, "subset_classes needs a nonempty class list");
  std::vector<bool> keep_mask(ds.class_count, false);
  for (int c : keep) {
    if (c < 0 || c >= ds.class_count)
      throw Error(ErrorCode::class_out_of_range,
                  "class " + std::to_string(c) + " outside [0, " +
                      std::to_string(ds.class_count) + ")");
    keep_mask[c] = true;
  }

  std::vector<Index> kept;
  for (Index i = 0; i < ds.size(); ++i) {
    int y = (*ds.labels)(i);
    if (y != kUnlabeled && keep_mask[y]) kept.push_back(i);
  }
  Dataset out;
  out.class_count = ds.class_count;
  out.features.resize(ds.dim(), static_cast<Index>(kept.size()));
  Labels labels(static_cast<Index>(kept.size()));
  for (Index j = 0; j < static_cast<Index>(kept.size()); ++j) {
    out.features.col(j) = ds.features.col(kept[j]);
    labels(j) = (*ds.labels)(kept[j]);
  }
  out.labels = std::move(labels);
  return out;
}

struct SyntheticData {
  Dataset source;               // labeled, classes [0, shared + outlier)
  Dataset target;               // unlabeled, drawn from classes [0, shared)
  Labels true_target_labels;    // ground truth held out of `target`
};

/// Gaussian class clusters. Classes [0, shared) exist in both domains;
/// classes [shared, shared + outlier) exist only in the source. Target
/// samples are translated by a global shift vector of norm domain_shift.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  const int total_classes = spec.shared_classes + spec.outlier_classes;
  auto rng = make_rng(spec.seed, kSeedRoleSynthetic);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  Matrix centers(spec.dim, total_classes);
  for (int c = 0; c < total_classes; ++c)
    for (int d = 0; d < spec.dim; ++d)
      centers(d, c) = spec.separation * unit_normal(rng);

  Vector shift = Vector::Zero(spec.dim);
  if (spec.domain_shift > 0.0) {
    for (int d = 0; d < spec.dim; ++d) shift(d) = unit_normal(rng);
    double norm = shift.norm();
    if (norm > 0.0) shift *= spec.domain_shift / norm;
  }

  SyntheticData data;
  const Index ns = static_cast<Index>(total_classes) * spec.source_per_class;
  data.source.features.resize(spec.dim, ns);
  Labels source_labels(ns);
  Index col = 0;
  for (int c = 0; c < total_classes; ++c)
    for (int s = 0; s < spec.source_per_class; ++s, ++col) {
      for (int d = 0; d < spec.dim; ++d)
        data.source.features(d, col) = centers(d, c) + spec.noise * unit_normal(rng);
      source_labels(col) = c;
    }
  data.source.labels = std::move(source_labels);
  data.source.class_count = total_classes;

  const Index nt = static_cast<Index>(spec.shared_classes) * spec.target_per_class;
  data.target.features.resize(spec.dim, nt);
  data.true_target_labels.resize(nt);
  col = 0;
  for (int c = 0; c < spec.shared_classes; ++c)
    for (int s = 0; s < spec.target_per_class; ++s, ++col) {
      for (int d = 0; d < spec.dim; ++d)
        data.target.features(d, col) =
            centers(d, c) + shift(d) + spec.noise * unit_normal(rng);
      data.true_target_labels(col) = c;
    }
  data.target.class_count = total_classes;
  return data;
}

/// Optional preprocessing: scales every sample column to unit Euclidean norm.
/// Zero-norm columns are left untouched.
inline Matrix l2_normalized(const Matrix& features) {
  Matrix out = features;
  for (Index j = 0; j < out.cols(); ++j) {
    double norm = out.col(j).norm();
    if (norm > 0.0) out.col(j) /= norm;
  }
  return out;
}

}  // namespace sptcl
