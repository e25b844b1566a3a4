#include <catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include "support.hpp"

using namespace sptcl;
using Catch::Approx;

TEST_CASE("accuracy basics") {
  Labels a(4), b(4);
  a << 0, 1, 2, 3;
  b << 0, 1, 2, 3;
  REQUIRE(accuracy(a, b) == 1.0);
  b << 1, 2, 3, 0;
  REQUIRE(accuracy(a, b) == 0.0);
  b << 0, 1, 2, 0;
  REQUIRE(accuracy(a, b) == 0.75);
}

TEST_CASE("accuracy rejects mismatched and empty inputs") {
  Labels a(3), b(2);
  a.setZero();
  b.setZero();
  REQUIRE_THROWS_AS(accuracy(a, b), Error);
  REQUIRE_THROWS_AS(accuracy(Labels(0), Labels(0)), Error);
}

TEST_CASE("accuracy is invariant under joint permutation") {
  std::mt19937_64 rng(90);
  Labels pred(30), truth(30);
  for (Index i = 0; i < 30; ++i) {
    pred(i) = static_cast<int>(rng() % 4);
    truth(i) = static_cast<int>(rng() % 4);
  }
  double base = accuracy(pred, truth);
  std::vector<Index> perm(30);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Labels pred2(30), truth2(30);
  for (Index i = 0; i < 30; ++i) {
    pred2(i) = pred(perm[i]);
    truth2(i) = truth(perm[i]);
  }
  REQUIRE(accuracy(pred2, truth2) == base);
}

TEST_CASE("1NN transfers the label of the closest source sample") {
  Dataset source;
  source.features.resize(2, 3);
  source.features << 0, 5, 10, 0, 0, 0;
  Labels y(3);
  y << 2, 0, 1;
  source.labels = y;
  source.class_count = 3;

  Dataset target;
  target.features.resize(2, 2);
  target.features << 5, 9.4, 0, 0;
  target.class_count = 3;

  Labels pred = baseline_1nn(source, target);
  REQUIRE(pred(0) == 0);  // exact match with source sample 1
  REQUIRE(pred(1) == 1);  // nearest is sample 2
}

TEST_CASE("1NN with a single source sample labels everything alike") {
  Dataset source;
  source.features = Matrix::Ones(3, 1);
  Labels y(1);
  y << 4;
  source.labels = y;
  source.class_count = 5;
  Dataset target;
  target.features = Matrix::Random(3, 7);
  target.class_count = 5;
  Labels pred = baseline_1nn(source, target);
  for (Index i = 0; i < 7; ++i) REQUIRE(pred(i) == 4);
}

TEST_CASE("1NN breaks exact distance ties to the lower source index") {
  Dataset source;
  source.features.resize(1, 2);
  source.features << -1, 1;
  Labels y(2);
  y << 0, 1;
  source.labels = y;
  source.class_count = 2;
  Dataset target;
  target.features = Matrix::Zero(1, 1);  // equidistant
  target.class_count = 2;
  REQUIRE(baseline_1nn(source, target)(0) == 0);
}

TEST_CASE("1NN on the source itself with clean labels is perfect") {
  std::mt19937_64 rng(91);
  auto [source, target] = oracle::random_domains(rng, 4, 20, 20, 3);
  target.features = source.features;
  Labels pred = baseline_1nn(source, target);
  REQUIRE(accuracy(pred, *source.labels) == 1.0);
}

TEST_CASE("1NN rejects dimension mismatches and unlabeled sources") {
  Dataset source;
  source.features = Matrix::Ones(3, 2);
  Labels y(2);
  y << 0, 1;
  source.labels = y;
  source.class_count = 2;
  Dataset target;
  target.features = Matrix::Ones(4, 2);
  REQUIRE_THROWS_AS(baseline_1nn(source, target), Error);
  source.labels.reset();
  target.features = Matrix::Ones(3, 2);
  REQUIRE_THROWS_AS(baseline_1nn(source, target), Error);
}

TEST_CASE("confidence histogram puts one-hot columns in the top bin") {
  Labels y(6);
  y << 0, 1, 2, 0, 1, 2;
  auto bins = confidence_histogram(one_hot(y, 3));
  REQUIRE(bins[9] == 6);
  long total = 0;
  for (long b : bins) total += b;
  REQUIRE(total == 6);
}

TEST_CASE("confidence histogram bins uniform columns at their max") {
  Matrix P = Matrix::Constant(4, 5, 0.25);  // max prob 0.25 -> bin [0.2, 0.3)
  auto bins = confidence_histogram(P);
  REQUIRE(bins[2] == 5);
}

TEST_CASE("confidence histogram of an empty matrix is all zero") {
  auto bins = confidence_histogram(Matrix(3, 0));
  for (long b : bins) REQUIRE(b == 0);
}

TEST_CASE("confidence histogram rejects non-simplex columns") {
  Matrix P = Matrix::Constant(3, 1, 0.5);
  REQUIRE_THROWS_AS(confidence_histogram(P), Error);
}

TEST_CASE("iteration records round trip through JSON lines") {
  IterationRecord rec;
  rec.iter = 3;
  rec.lambda = 0.125;
  rec.selected_count = 42;
  rec.objective = 17.5;
  rec.target_accuracy = 0.875;
  rec.confidence_histogram = {1, 0, 0, 2, 0, 0, 0, 0, 0, 7};

  std::ostringstream out;
  write_records_jsonl(out, {rec});
  std::string line = out.str();
  REQUIRE(line.find("\"iter\":3") != std::string::npos);
  REQUIRE(line.find("\"lambda\":0.125") != std::string::npos);
  REQUIRE(line.find("\"selected_count\":42") != std::string::npos);
  REQUIRE(line.find("\"objective\":17.5") != std::string::npos);
  REQUIRE(line.find("\"target_accuracy\":0.875") != std::string::npos);
  REQUIRE(line.find("\"confidence_histogram\"") != std::string::npos);
  REQUIRE(line.find("source_accuracy") == std::string::npos);  // absent when not set

  std::istringstream in(line);
  auto parsed = read_records_jsonl(in);
  REQUIRE(parsed.size() == 1);
  REQUIRE(parsed[0].iter == rec.iter);
  REQUIRE(parsed[0].lambda == rec.lambda);
  REQUIRE(parsed[0].selected_count == rec.selected_count);
  REQUIRE(parsed[0].objective == rec.objective);
  REQUIRE(parsed[0].target_accuracy == rec.target_accuracy);
  REQUIRE_FALSE(parsed[0].source_accuracy.has_value());
  REQUIRE(parsed[0].confidence_histogram == rec.confidence_histogram);
}
