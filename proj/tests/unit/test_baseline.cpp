#include <doctest.h>

#include <set>

#include "drld/baseline.h"
#include "drld/error.h"
#include "drld/mdp.h"

using namespace drld;

namespace {

DataBlock blobs() {
  RawDataset raw;
  raw.features = RowMatrix(40, 2);
  raw.labels = Labels(40);
  for (int i = 0; i < 40; ++i) {
    const int c = i % 2;
    raw.features(i, 0) = c * 10.0 + (i % 7) * 0.1;
    raw.features(i, 1) = c * 10.0 + (i % 5) * 0.1;
    (*raw.labels)[static_cast<std::size_t>(i)] = c;
  }
  return normalize(raw);
}

}  // namespace

TEST_CASE("lattice enumerates the finest grid eps-major") {
  const auto base = SpaceBase::make(2, 40, 0.25, 2, 2, 2);
  const auto lat = Lattice::of(base, 2);
  CHECK(lat.eps_count == 4);
  CHECK(lat.minpts_count == 10);
  CHECK(lat.size() == 40);
  CHECK(lat.at(0).eps == doctest::Approx(base.eps_min));
  CHECK(lat.at(0).minpts == 1);
  CHECK(lat.at(1).minpts == 2);
  CHECK(lat.at(10).eps == doctest::Approx(2 * base.eps_min));
  CHECK(lat.at(39).eps == doctest::Approx(base.eps_max));
  CHECK(lat.at(39).minpts == 10);
}

TEST_CASE("one round of budget is one clustering") {
  const auto block = blobs();
  const auto partial = mask_labels(block, 0.5, 1);
  const auto base = SpaceBase::make(2, 40, 0.25, 2, 2, 2);
  const auto r = random_search(block, partial, 1, base, 2, 9);
  CHECK(r.rounds_consumed == 1);
  CHECK(r.trajectory.size() == 1);
  CHECK_THROWS_AS(random_search(block, partial, 0, base, 2, 9), ConfigError);
}

TEST_CASE("a budget covering the lattice finds its argmax") {
  const auto block = blobs();
  const auto partial = mask_labels(block, 0.5, 1);
  const auto base = SpaceBase::make(2, 40, 0.25, 2, 2, 2);
  const auto lat = Lattice::of(base, 2);
  double best = -1;
  for (std::int64_t i = 0; i < lat.size(); ++i) {
    best = std::max(best, immediate_reward(cluster(block, lat.at(i)), partial));
  }
  const auto r = random_search(block, partial, lat.size() + 10, base, 2, 3);
  CHECK(r.rounds_consumed == lat.size());
  CHECK(r.best_reward == doctest::Approx(best));
}

TEST_CASE("best-so-far never decreases and draws are distinct") {
  const auto block = blobs();
  const auto partial = mask_labels(block, 0.5, 2);
  const auto base = SpaceBase::make(2, 40, 0.25, 5, 4, 3);
  const auto r = random_search(block, partial, 30, base, 3, 5);
  REQUIRE(r.trajectory.size() == 30);
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) CHECK(r.trajectory[i] >= r.trajectory[i - 1]);
  CHECK(r.trajectory.back() == r.best_reward);
  CHECK(r.best_so_far.back() == r.best_params);
  const auto again = random_search(block, partial, 30, base, 3, 5);
  CHECK(again.best_params == r.best_params);
  CHECK(again.trajectory == r.trajectory);
}
