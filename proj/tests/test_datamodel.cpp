#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <set>

#include "support.hpp"

using namespace sptcl;
using Catch::Approx;

TEST_CASE("one_hot builds basis columns") {
  Labels labels(2);
  labels << 0, 2;
  Matrix expected(3, 2);
  expected << 1, 0, 0, 0, 0, 1;
  REQUIRE(one_hot(labels, 3) == expected);
}

TEST_CASE("one_hot of an empty vector is C x 0") {
  Matrix out = one_hot(Labels(0), 3);
  REQUIRE(out.rows() == 3);
  REQUIRE(out.cols() == 0);
}

TEST_CASE("one_hot rejects out-of-range labels") {
  Labels labels(1);
  labels << 3;
  REQUIRE_THROWS_AS(one_hot(labels, 3), Error);
}

TEST_CASE("label noise with p=0 is the identity") {
  Labels labels(5);
  labels << 0, 1, 2, 1, 0;
  auto result = inject_label_noise(labels, 3, NoiseSpec{0.0, 42});
  REQUIRE(result.labels == labels);
  for (bool f : result.flipped) REQUIRE_FALSE(f);
}

TEST_CASE("label noise with p=1 and two classes flips everything") {
  Labels labels(6);
  labels << 0, 1, 0, 1, 1, 0;
  auto result = inject_label_noise(labels, 2, NoiseSpec{1.0, 7});
  for (Index i = 0; i < labels.size(); ++i) {
    REQUIRE(result.labels(i) == 1 - labels(i));
    REQUIRE(result.flipped[i]);
  }
}

TEST_CASE("label noise never flips onto the original label") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    int C = 2 + static_cast<int>(rng() % 9);
    Labels labels(200);
    for (Index i = 0; i < labels.size(); ++i)
      labels(i) = static_cast<int>(rng() % static_cast<std::uint64_t>(C));
    auto result = inject_label_noise(labels, C, NoiseSpec{0.7, rng()});
    for (Index i = 0; i < labels.size(); ++i) {
      if (result.flipped[i])
        REQUIRE(result.labels(i) != labels(i));
      else
        REQUIRE(result.labels(i) == labels(i));
      REQUIRE(result.labels(i) >= 0);
      REQUIRE(result.labels(i) < C);
    }
  }
}

TEST_CASE("flip fraction concentrates around p_noise") {
  const Index n = 10000;
  const double p = 0.4;
  const double bound = 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(n));
  Labels labels(n);
  for (Index i = 0; i < n; ++i) labels(i) = static_cast<int>(i % 31);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto result = inject_label_noise(labels, 31, NoiseSpec{p, seed});
    double fraction =
        static_cast<double>(std::count(result.flipped.begin(), result.flipped.end(), true)) /
        static_cast<double>(n);
    REQUIRE(std::abs(fraction - p) <= bound);
  }
}

TEST_CASE("label noise is deterministic in the seed") {
  Labels labels(50);
  for (Index i = 0; i < 50; ++i) labels(i) = static_cast<int>(i % 4);
  auto a = inject_label_noise(labels, 4, NoiseSpec{0.5, 99});
  auto b = inject_label_noise(labels, 4, NoiseSpec{0.5, 99});
  REQUIRE(a.labels == b.labels);
  REQUIRE(a.flipped == b.flipped);
}

TEST_CASE("label noise requires two classes") {
  Labels labels(3);
  labels << 0, 0, 0;
  REQUIRE_THROWS_AS(inject_label_noise(labels, 1, NoiseSpec{0.5, 0}), Error);
  REQUIRE_NOTHROW(inject_label_noise(labels, 1, NoiseSpec{0.0, 0}));
}

static Dataset six_class_dataset() {
  Dataset ds;
  ds.class_count = 6;
  ds.features = Matrix::Random(4, 60);
  Labels labels(60);
  for (Index i = 0; i < 60; ++i) labels(i) = static_cast<int>(i % 6);
  ds.labels = labels;
  return ds;
}

TEST_CASE("subset with every class keeps the dataset") {
  Dataset ds = six_class_dataset();
  Dataset out = subset_classes(ds, {0, 1, 2, 3, 4, 5});
  REQUIRE(out.features == ds.features);
  REQUIRE(*out.labels == *ds.labels);
  REQUIRE(out.class_count == 6);
}

TEST_CASE("subset size equals the sum of kept per-class counts") {
  Dataset ds = six_class_dataset();
  Dataset out = subset_classes(ds, {0, 1, 2});
  Index expected = 0;
  for (Index i = 0; i < ds.size(); ++i)
    if ((*ds.labels)(i) <= 2) ++expected;
  REQUIRE(out.size() == expected);
  // labels stay in the original indexing and class_count is untouched
  REQUIRE(out.class_count == 6);
  std::set<int> seen;
  for (Index i = 0; i < out.size(); ++i) seen.insert((*out.labels)(i));
  REQUIRE(seen == std::set<int>{0, 1, 2});
}

TEST_CASE("subset rejects out-of-range and empty keep sets") {
  Dataset ds = six_class_dataset();
  REQUIRE_THROWS_AS(subset_classes(ds, {99}), Error);
  REQUIRE_THROWS_AS(subset_classes(ds, {}), Error);
  Dataset unlabeled;
  unlabeled.features = Matrix::Random(4, 5);
  unlabeled.class_count = 6;
  REQUIRE_THROWS_AS(subset_classes(unlabeled, {0}), Error);
}

TEST_CASE("synthetic class means coincide without shift or outliers") {
  SyntheticSpec spec;
  spec.shared_classes = 3;
  spec.outlier_classes = 0;
  spec.source_per_class = 200;
  spec.target_per_class = 200;
  spec.dim = 6;
  spec.noise = 1e-9;
  spec.domain_shift = 0.0;
  spec.seed = 5;
  auto data = generate_synthetic(spec);
  for (int c = 0; c < 3; ++c) {
    Vector src_mean = Vector::Zero(spec.dim), tgt_mean = Vector::Zero(spec.dim);
    Index ns = 0, nt = 0;
    for (Index i = 0; i < data.source.size(); ++i)
      if ((*data.source.labels)(i) == c) {
        src_mean += data.source.features.col(i);
        ++ns;
      }
    for (Index i = 0; i < data.target.size(); ++i)
      if (data.true_target_labels(i) == c) {
        tgt_mean += data.target.features.col(i);
        ++nt;
      }
    REQUIRE((src_mean / ns - tgt_mean / nt).norm() < 1e-6);
  }
}

TEST_CASE("synthetic source covers outliers, target stays shared") {
  SyntheticSpec spec;
  spec.shared_classes = 3;
  spec.outlier_classes = 3;
  spec.source_per_class = 10;
  spec.target_per_class = 5;
  spec.seed = 11;
  auto data = generate_synthetic(spec);
  REQUIRE(data.source.class_count == 6);
  REQUIRE(data.source.size() == 60);
  REQUIRE(data.target.size() == 15);
  REQUIRE(data.source.labels->maxCoeff() == 5);
  REQUIRE(data.true_target_labels.maxCoeff() <= 2);
  REQUIRE_FALSE(data.target.labels.has_value());
}

TEST_CASE("synthetic generation is bit-deterministic") {
  SyntheticSpec spec;
  spec.seed = 123;
  auto a = generate_synthetic(spec);
  auto b = generate_synthetic(spec);
  REQUIRE(a.source.features == b.source.features);
  REQUIRE(a.target.features == b.target.features);
  REQUIRE(*a.source.labels == *b.source.labels);
  REQUIRE(a.true_target_labels == b.true_target_labels);
}

TEST_CASE("csv feature loading, zeros case") {
  oracle::TempDir tmp("csv");
  {
    std::ofstream out(tmp.file("z.csv"));
    out << "0,0\n0,0\n0,0\n";
  }
  Matrix X = load_features_csv(tmp.file("z.csv"));
  REQUIRE(X.rows() == 2);
  REQUIRE(X.cols() == 3);
  REQUIRE(X.isZero(0.0));
}

TEST_CASE("csv loader reports non-finite values with their position") {
  oracle::TempDir tmp("csv_nan");
  {
    std::ofstream out(tmp.file("bad.csv"));
    out << "1,2\n3,nan\n";
  }
  try {
    load_features_csv(tmp.file("bad.csv"));
    FAIL("expected an error");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::non_finite_value);
    REQUIRE(std::string(e.what()).find("row 2") != std::string::npos);
    REQUIRE(std::string(e.what()).find("column 2") != std::string::npos);
  }
}

TEST_CASE("csv loader rejects ragged rows") {
  oracle::TempDir tmp("csv_ragged");
  {
    std::ofstream out(tmp.file("r.csv"));
    out << "1,2\n3\n";
  }
  REQUIRE_THROWS_AS(load_features_csv(tmp.file("r.csv")), Error);
}

TEST_CASE("binary feature round trip is bit exact") {
  oracle::TempDir tmp("bin");
  std::mt19937_64 rng(3);
  Matrix X = oracle::random_matrix(rng, 2, 4);
  save_features_binary(tmp.file("x.bin"), X);
  Matrix Y = load_features_binary(tmp.file("x.bin"));
  REQUIRE(Y.rows() == 2);
  REQUIRE(Y.cols() == 4);
  REQUIRE(X == Y);
  REQUIRE(detect_format(tmp.file("x.bin")) == FileFormat::binary);
}

TEST_CASE("csv feature round trip is exact at 17 significant digits") {
  oracle::TempDir tmp("csv_rt");
  std::mt19937_64 rng(4);
  Matrix X = oracle::random_matrix(rng, 7, 13, 100.0);
  save_features_csv(tmp.file("x.csv"), X);
  Matrix Y = load_features_csv(tmp.file("x.csv"));
  REQUIRE((X - Y).cwiseAbs().maxCoeff() <= 1e-12 * X.cwiseAbs().maxCoeff());
  REQUIRE(detect_format(tmp.file("x.csv")) == FileFormat::csv);
}

TEST_CASE("binary loader rejects wrong magic and truncation") {
  oracle::TempDir tmp("bin_bad");
  {
    std::ofstream out(tmp.file("bad.bin"), std::ios::binary);
    out << "NOPE";
  }
  REQUIRE_THROWS_AS(load_features_binary(tmp.file("bad.bin")), Error);
  Matrix X = Matrix::Ones(2, 2);
  save_features_binary(tmp.file("trunc.bin"), X);
  std::filesystem::resize_file(tmp.file("trunc.bin"), 20);
  REQUIRE_THROWS_AS(load_features_binary(tmp.file("trunc.bin")), Error);
  REQUIRE_THROWS_AS(load_features_binary(tmp.file("missing.bin")), Error);
}

TEST_CASE("label files round trip in both formats") {
  oracle::TempDir tmp("labels");
  Labels labels(5);
  labels << 0, 3, kUnlabeled, 2, 1;
  save_labels_csv(tmp.file("y.csv"), labels);
  save_labels_binary(tmp.file("y.bin"), labels);
  REQUIRE(load_labels_csv(tmp.file("y.csv")) == labels);
  REQUIRE(load_labels_binary(tmp.file("y.bin")) == labels);
}

TEST_CASE("load_dataset attaches labels and infers class count") {
  oracle::TempDir tmp("ds");
  Matrix X(3, 4);
  X << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  Labels y(4);
  y << 0, 2, 1, 2;
  save_features_binary(tmp.file("x.bin"), X);
  save_labels_csv(tmp.file("y.csv"), y);
  Dataset ds = load_dataset(tmp.file("x.bin"), tmp.file("y.csv"));
  REQUIRE(ds.class_count == 3);
  REQUIRE(ds.dim() == 3);
  REQUIRE(ds.size() == 4);
  Dataset plain = load_dataset(tmp.file("x.bin"));
  REQUIRE_FALSE(plain.labels.has_value());
}

TEST_CASE("l2 normalization produces unit columns") {
  std::mt19937_64 rng(9);
  Matrix X = oracle::random_matrix(rng, 5, 8, 3.0);
  Matrix N = l2_normalized(X);
  for (Index j = 0; j < N.cols(); ++j) REQUIRE(N.col(j).norm() == Approx(1.0).epsilon(1e-12));
}
