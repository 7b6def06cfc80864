#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "drld/data.h"
#include "drld/error.h"

using namespace drld;

namespace {

RawDataset from_text(const std::string& text, bool labels) {
  std::istringstream in(text);
  return parse_csv(in, {labels, false}, "t");
}

RawDataset column(std::vector<double> values) {
  RawDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) ds.features(static_cast<Eigen::Index>(i), 0) = values[i];
  return ds;
}

RawDataset random_dataset(int n, int d, std::uint64_t seed, int classes = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 5.0);
  RawDataset ds;
  ds.features.resize(n, d);
  Labels labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) ds.features(i, j) = g(rng);
    labels[static_cast<std::size_t>(i)] = i % classes;
  }
  ds.labels = labels;
  return ds;
}

}  // namespace

TEST_CASE("csv with labels keeps row order and maps labels by first appearance") {
  const auto ds = from_text("0,0,a\n1,0,a\n5,5,b\n", true);
  CHECK(ds.rows() == 3);
  CHECK(ds.dims() == 2);
  REQUIRE(ds.labels);
  CHECK(*ds.labels == Labels{0, 0, 1});
  CHECK(ds.label_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.features(2, 0) == 5.0);
}

TEST_CASE("csv falls back to whitespace separators") {
  const auto ds = from_text("1.5\t2\t3\n4 5 6\n", true);
  CHECK(ds.rows() == 2);
  CHECK(ds.dims() == 2);
  CHECK(ds.features(0, 0) == 1.5);
}

TEST_CASE("malformed row reports its line number") {
  try {
    from_text("1,x\n", false);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
  }
  try {
    from_text("1,2\n3,4\n5\n", false);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
}

TEST_CASE("empty input is an empty-dataset error") {
  CHECK_THROWS_AS(from_text("", false), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", {}), DataError);
}

TEST_CASE("min-max scaling") {
  const auto b = normalize(column({2, 4, 6}));
  CHECK(b.features(0, 0) == 0.0);
  CHECK(b.features(1, 0) == 0.5);
  CHECK(b.features(2, 0) == 1.0);

  const auto c = normalize(column({5, 5, 5}));
  for (int i = 0; i < 3; ++i) CHECK(c.features(i, 0) == 0.0);
}

TEST_CASE("unit square: centroid and lowest-index center object") {
  RawDataset ds;
  ds.features.resize(4, 2);
  ds.features << 0, 0, 1, 0, 0, 1, 1, 1;
  const auto b = normalize(ds);
  CHECK(b.centroid(0) == doctest::Approx(0.5));
  CHECK(b.centroid(1) == doctest::Approx(0.5));
  CHECK(b.center_object_index == 0);
}

TEST_CASE("non-finite features are rejected") {
  auto ds = column({1, NAN, 3});
  CHECK_THROWS_AS(normalize(ds), DataError);
}

TEST_CASE("normalized blocks lie in the unit cube with diameter at most sqrt(d)") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int d = 1 + static_cast<int>(seed % 4);
    const auto b = normalize(random_dataset(30, d, seed));
    CHECK(b.features.minCoeff() >= 0.0);
    CHECK(b.features.maxCoeff() <= 1.0);
    for (int i = 0; i < 30; ++i) {
      for (int j = 0; j < 30; ++j) CHECK((b.features.row(i) - b.features.row(j)).norm() <= std::sqrt(d) + 1e-12);
    }
    // center object minimises distance to the centroid
    const double best = (b.features.row(b.center_object_index).transpose() - b.centroid).norm();
    for (int i = 0; i < 30; ++i) CHECK((b.features.row(i).transpose() - b.centroid).norm() >= best);
  }
}

TEST_CASE("normalization is idempotent") {
  const auto once = normalize(random_dataset(50, 3, 11));
  RawDataset again;
  again.features = once.features;
  const auto twice = normalize(again);
  CHECK((once.features - twice.features).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stream partition sizes") {
  auto sizes = [](int n, int k) {
    std::vector<Eigen::Index> out;
    for (const auto& b : partition_stream(column(std::vector<double>(static_cast<std::size_t>(n), 1.0)), k)) {
      out.push_back(b.rows());
    }
    return out;
  };
  CHECK(sizes(10, 3) == std::vector<Eigen::Index>{3, 3, 4});
  CHECK(sizes(5, 5) == std::vector<Eigen::Index>(5, 1));
  CHECK(sizes(80864, 16) == std::vector<Eigen::Index>(16, 5054));
  CHECK_THROWS_AS(sizes(3, 4), DataError);
}

TEST_CASE("stream blocks preserve row order and are numbered from 1") {
  const auto ds = random_dataset(23, 2, 5, 23);
  const auto blocks = partition_stream(ds, 4);
  Labels joined;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(blocks[i].block_index == static_cast<int>(i + 1));
    joined.insert(joined.end(), blocks[i].labels->begin(), blocks[i].labels->end());
  }
  CHECK(joined == *ds.labels);
}

TEST_CASE("label masking") {
  const auto block = normalize(random_dataset(300, 2, 1));
  const auto p = mask_labels(block, 0.2, 42);
  CHECK(p.size() == 60);
  CHECK(std::is_sorted(p.indices.begin(), p.indices.end()));
  CHECK(std::adjacent_find(p.indices.begin(), p.indices.end()) == p.indices.end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.indices[i] < 300);
    CHECK(p.values[i] == (*block.labels)[static_cast<std::size_t>(p.indices[i])]);
  }
  CHECK(mask_labels(block, 1.0, 3).size() == 300);
  const auto q = mask_labels(block, 0.2, 42);
  CHECK(q.indices == p.indices);
  CHECK(mask_labels(block, 0.2, 43).indices != p.indices);

  DataBlock unlabeled = block;
  unlabeled.labels.reset();
  CHECK_THROWS_AS(mask_labels(unlabeled, 0.2, 1), DataError);
  CHECK_THROWS_AS(mask_labels(block, 0.0, 1), DataError);
}

TEST_CASE("synthetic stream shape") {
  SyntheticStreamSpec spec;
  spec.num_blocks = 4;
  spec.rows_per_block = 50;
  const auto ds = synthetic_stream(spec);
  CHECK(ds.rows() == 200);
  CHECK(ds.dims() == 2);
  REQUIRE(ds.labels);
  CHECK(*std::max_element(ds.labels->begin(), ds.labels->end()) == 3);
  const auto again = synthetic_stream(spec);
  CHECK(again.features == ds.features);
}
