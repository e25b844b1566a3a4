#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sptcl/types.hpp"

namespace sptcl {

/// Fraction of exact label matches.
inline double accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::dimension_mismatch,
                "prediction/truth length mismatch: " + std::to_string(predicted.size()) +
                    " vs " + std::to_string(truth.size()));
  if (predicted.size() == 0)
    throw Error(ErrorCode::dimension_mismatch, "accuracy of empty label vectors is undefined");
  Index hits = 0;
  for (Index i = 0; i < predicted.size(); ++i)
    if (predicted(i) == truth(i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

/// 1-nearest-neighbor transfer baseline: each target sample takes the label of
/// its closest source sample by Euclidean distance, ties to the lower index.
inline Labels baseline_1nn(const Dataset& source, const Dataset& target) {
  if (!source.labels)
    throw Error(ErrorCode::invalid_config, "1NN baseline needs source labels");
  if (source.dim() != target.dim())
    throw Error(ErrorCode::dimension_mismatch,
                "source dim " + std::to_string(source.dim()) + " vs target dim " +
                    std::to_string(target.dim()));
  Labels out(target.size());
  for (Index t = 0; t < target.size(); ++t) {
    double best = std::numeric_limits<double>::infinity();
    Index best_j = 0;
    for (Index j = 0; j < source.size(); ++j) {
      double d = (source.features.col(j) - target.features.col(t)).squaredNorm();
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    out(t) = (*source.labels)(best_j);
  }
  return out;
}

/// Histogram of the per-column maximum class probability over ten equal bins
/// of [0, 1]; bin b covers [b/10, (b+1)/10), with the last bin closed at 1.
inline std::array<long, 10> confidence_histogram(const Matrix& prob_columns) {
  std::array<long, 10> bins{};
  for (Index i = 0; i < prob_columns.cols(); ++i) {
    const auto col = prob_columns.col(i);
    if (col.minCoeff() < -1e-9 || std::abs(col.sum() - 1.0) > 1e-6)
      throw Error(ErrorCode::invalid_config,
                  "column " + std::to_string(i) + " is not on the probability simplex");
    double top = col.maxCoeff();
    int b = 9;
    while (b > 0 && top < static_cast<double>(b) / 10.0) --b;
    ++bins[b];
  }
  return bins;
}

/// Per-outer-iteration diagnostics emitted by fit and serialized as JSON lines.
struct IterationRecord {
  int iter = 0;
  double lambda = 0.0;
  long selected_count = 0;
  double objective = 0.0;
  std::optional<double> target_accuracy;
  std::optional<double> source_accuracy;
  std::array<long, 10> confidence_histogram{};
};

inline void to_json(nlohmann::json& j, const IterationRecord& rec) {
  j = nlohmann::json{{"iter", rec.iter},
                     {"lambda", rec.lambda},
                     {"selected_count", rec.selected_count},
                     {"objective", rec.objective},
                     {"confidence_histogram", rec.confidence_histogram}};
  if (rec.target_accuracy) j["target_accuracy"] = *rec.target_accuracy;
  if (rec.source_accuracy) j["source_accuracy"] = *rec.source_accuracy;
}

inline void from_json(const nlohmann::json& j, IterationRecord& rec) {
  j.at("iter").get_to(rec.iter);
  j.at("lambda").get_to(rec.lambda);
  j.at("selected_count").get_to(rec.selected_count);
  j.at("objective").get_to(rec.objective);
  j.at("confidence_histogram").get_to(rec.confidence_histogram);
  if (j.contains("target_accuracy")) rec.target_accuracy = j["target_accuracy"].get<double>();
  if (j.contains("source_accuracy")) rec.source_accuracy = j["source_accuracy"].get<double>();
}

inline void write_records_jsonl(std::ostream& out, const std::vector<IterationRecord>& records) {
  for (const auto& rec : records) out << nlohmann::json(rec).dump() << '\n';
}

inline std::vector<IterationRecord> read_records_jsonl(std::istream& in) {
  std::vector<IterationRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(nlohmann::json::parse(line).get<IterationRecord>());
  }
  return records;
}

}  // namespace sptcl
