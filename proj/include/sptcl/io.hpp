#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sptcl/types.hpp"

// File formats:
//   CSV features  one sample per line, comma-separated decimal floats, no header
//   CSV labels    one integer per line, -1 = unlabeled
//   SPTF          "SPTF", u32 version=1, u64 n, u64 m, n*m little-endian f64
//                 in sample-major order
//   SPTL          "SPTL", u32 version=1, u64 n, n little-endian i64

static_assert(std::endian::native == std::endian::little,
              "binary readers/writers assume a little-endian host");

namespace sptcl {

enum class FileFormat { csv, binary };

namespace detail {

inline std::ifstream open_for_read(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::missing_input, "cannot open " + path);
  return in;
}

inline std::ofstream open_for_write(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::missing_input, "cannot open " + path + " for writing");
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view token, const std::string& where) {
  token = trim(token);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error(ErrorCode::malformed_file,
                "unparseable value '" + std::string(token) + "' at " + where);
  return value;
}

inline long long parse_int(std::string_view token, const std::string& where) {
  token = trim(token);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error(ErrorCode::malformed_file,
                "unparseable integer '" + std::string(token) + "' at " + where);
  return value;
}

template <typename T>
void read_pod(std::istream& in, T& out, const std::string& what) {
  in.read(reinterpret_cast<char*>(&out), sizeof(T));
  if (!in) throw Error(ErrorCode::malformed_file, "truncated file while reading " + what);
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline std::string position(Index row, Index col) {
  return "row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1);
}

}  // namespace detail

inline Matrix load_features_csv(const std::string& path) {
  auto in = detail::open_for_read(path, false);
  std::vector<double> values;
  Index dim = -1, samples = 0;
  std::string line;
  while (std::getline(in, line)) {
    Index col = 0;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      std::string_view token = rest.substr(0, comma);
      double v = detail::parse_double(token, detail::position(samples, col));
      if (!std::isfinite(v))
        throw Error(ErrorCode::non_finite_value,
                    "non-finite value at " + detail::position(samples, col));
      values.push_back(v);
      ++col;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (dim < 0) dim = col;
    if (col != dim)
      throw Error(ErrorCode::dimension_mismatch,
                  "row " + std::to_string(samples + 1) + " has " + std::to_string(col) +
                      " values, expected " + std::to_string(dim));
    ++samples;
  }
  if (samples == 0) throw Error(ErrorCode::malformed_file, path + " contains no samples");
  // sample-major rows land directly in the columns of a column-major matrix
  return Eigen::Map<const Matrix>(values.data(), dim, samples);
}

inline void save_features_csv(const std::string& path, const Matrix& features) {
  auto out = detail::open_for_write(path, false);
  char buf[40];
  for (Index j = 0; j < features.cols(); ++j) {
    for (Index i = 0; i < features.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", features(i, j));
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

inline constexpr char kFeatureMagic[4] = {'S', 'P', 'T', 'F'};
inline constexpr char kLabelMagic[4] = {'S', 'P', 'T', 'L'};
inline constexpr std::uint32_t kBinaryVersion = 1;

inline Matrix load_features_binary(const std::string& path) {
  auto in = detail::open_for_read(path, true);
  char magic[4];
  detail::read_pod(in, magic, "magic");
  if (std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw Error(ErrorCode::malformed_file, path + " is not an SPTF feature file");
  std::uint32_t version;
  detail::read_pod(in, version, "version");
  if (version != kBinaryVersion)
    throw Error(ErrorCode::malformed_file,
                "unsupported SPTF version " + std::to_string(version));
  std::uint64_t n, m;
  detail::read_pod(in, n, "sample count");
  detail::read_pod(in, m, "feature dimension");
  if (n == 0 || m == 0)
    throw Error(ErrorCode::malformed_file, path + " declares an empty matrix");
  Matrix features(static_cast<Index>(m), static_cast<Index>(n));
  in.read(reinterpret_cast<char*>(features.data()),
          static_cast<std::streamsize>(sizeof(double) * n * m));
  if (!in) throw Error(ErrorCode::malformed_file, "truncated payload in " + path);
  for (Index j = 0; j < features.cols(); ++j)
    for (Index i = 0; i < features.rows(); ++i)
      if (!std::isfinite(features(i, j)))
        throw Error(ErrorCode::non_finite_value,
                    "non-finite value at " + detail::position(j, i));
  return features;
}

inline void save_features_binary(const std::string& path, const Matrix& features) {
  auto out = detail::open_for_write(path, true);
  out.write(kFeatureMagic, 4);
  detail::write_pod(out, kBinaryVersion);
  detail::write_pod(out, static_cast<std::uint64_t>(features.cols()));
  detail::write_pod(out, static_cast<std::uint64_t>(features.rows()));
  out.write(reinterpret_cast<const char*>(features.data()),
            static_cast<std::streamsize>(sizeof(double) * features.size()));
}

inline Labels load_labels_csv(const std::string& path) {
  auto in = detail::open_for_read(path, false);
  std::vector<int> values;
  std::string line;
  while (std::getline(in, line)) {
    long long v = detail::parse_int(line, "line " + std::to_string(values.size() + 1));
    if (v != kUnlabeled && (v < 0 || v > INT32_MAX))
      throw Error(ErrorCode::class_out_of_range,
                  "label " + std::to_string(v) + " on line " + std::to_string(values.size() + 1));
    values.push_back(static_cast<int>(v));
  }
  if (values.empty()) throw Error(ErrorCode::malformed_file, path + " contains no labels");
  return Eigen::Map<const Labels>(values.data(), static_cast<Index>(values.size()));
}

inline void save_labels_csv(const std::string& path, const Labels& labels) {
  auto out = detail::open_for_write(path, false);
  for (Index i = 0; i < labels.size(); ++i) out << labels(i) << '\n';
}

inline Labels load_labels_binary(const std::string& path) {
  auto in = detail::open_for_read(path, true);
  char magic[4];
  detail::read_pod(in, magic, "magic");
  if (std::memcmp(magic, kLabelMagic, 4) != 0)
    throw Error(ErrorCode::malformed_file, path + " is not an SPTL label file");
  std::uint32_t version;
  detail::read_pod(in, version, "version");
  if (version != kBinaryVersion)
    throw Error(ErrorCode::malformed_file,
                "unsupported SPTL version " + std::to_string(version));
  std::uint64_t n;
  detail::read_pod(in, n, "label count");
  if (n == 0) throw Error(ErrorCode::malformed_file, path + " contains no labels");
  Labels labels(static_cast<Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    std::int64_t v;
    detail::read_pod(in, v, "label " + std::to_string(i + 1));
    if (v != kUnlabeled && (v < 0 || v > INT32_MAX))
      throw Error(ErrorCode::class_out_of_range,
                  "label " + std::to_string(v) + " at index " + std::to_string(i));
    labels(static_cast<Index>(i)) = static_cast<int>(v);
  }
  return labels;
}

inline void save_labels_binary(const std::string& path, const Labels& labels) {
  auto out = detail::open_for_write(path, true);
  out.write(kLabelMagic, 4);
  detail::write_pod(out, kBinaryVersion);
  detail::write_pod(out, static_cast<std::uint64_t>(labels.size()));
  for (Index i = 0; i < labels.size(); ++i)
    detail::write_pod(out, static_cast<std::int64_t>(labels(i)));
}

inline Matrix load_features(const std::string& path, FileFormat format) {
  return format == FileFormat::csv ? load_features_csv(path) : load_features_binary(path);
}

inline void save_features(const std::string& path, const Matrix& features, FileFormat format) {
  format == FileFormat::csv ? save_features_csv(path, features)
                            : save_features_binary(path, features);
}

inline Labels load_labels(const std::string& path, FileFormat format) {
  return format == FileFormat::csv ? load_labels_csv(path) : load_labels_binary(path);
}

inline void save_labels(const std::string& path, const Labels& labels, FileFormat format) {
  format == FileFormat::csv ? save_labels_csv(path, labels) : save_labels_binary(path, labels);
}

/// Sniffs the 4-byte magic to decide between the binary and CSV readers.
inline FileFormat detect_format(const std::string& path) {
  auto in = detail::open_for_read(path, true);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && (std::memcmp(magic, kFeatureMagic, 4) == 0 ||
                           std::memcmp(magic, kLabelMagic, 4) == 0))
    return FileFormat::binary;
  return FileFormat::csv;
}

/// Loads a feature file plus an optional label file into a Dataset.
/// class_count defaults to max(label) + 1 when not supplied.
inline Dataset load_dataset(const std::string& features_path,
                            const std::optional<std::string>& labels_path = std::nullopt,
                            std::optional<int> class_count = std::nullopt) {
  Dataset ds;
  ds.features = load_features(features_path, detect_format(features_path));
  if (labels_path) {
    ds.labels = load_labels(*labels_path, detect_format(*labels_path));
    ds.class_count = class_count.value_or(
        ds.labels->size() > 0 ? ds.labels->maxCoeff() + 1 : 0);
  } else if (class_count) {
    ds.class_count = *class_count;
  }
  validate(ds);
  return ds;
}

}  // namespace sptcl
