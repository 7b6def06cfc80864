#include <doctest.h>

#include <cmath>
#include <random>

#include "drld/error.h"
#include "drld/mdp.h"

using namespace drld;

namespace {

LayerSpace simple_layer() {
  LayerSpace s;
  s.eps_b1 = 0.02;
  s.eps_b2 = 0.2;
  s.theta_eps = 0.02;
  s.minpts_b1 = 1;
  s.minpts_b2 = 20;
  s.theta_minpts = 5;
  return s;
}

DataBlock six_points() {
  RawDataset ds;
  ds.features.resize(6, 2);
  ds.features << 0, 0, 0, 0.1, 1, 1, 0.875, 1, 0.5, 0, 0.5, 0.05;
  return normalize(ds);
}

}  // namespace

TEST_CASE("raw state without clusters") {
  const auto block = six_points();
  ClusterOutcome none;
  none.assignment.assign(6, kNoise);
  const auto s = build_raw_state(block, {0.1, 3}, simple_layer(), none);
  CHECK(s.k() == 0);
  CHECK(s.global[6] == 0.0);
}

TEST_CASE("midpoint of a symmetric layer has equal eps distances") {
  const auto s = build_raw_state(six_points(), {0.11, 10}, simple_layer(), summarize(six_points(), std::vector<int>(6, kNoise)));
  CHECK(s.global[2] == doctest::Approx(s.global[3]));
}

TEST_CASE("three clusters on six points") {
  const auto block = six_points();
  const auto outcome = summarize(block, {0, 0, 1, 1, 2, 2});
  const auto s = build_raw_state(block, {0.15, 2}, simple_layer(), outcome);
  REQUIRE(s.k() == 3);
  CHECK(s.local_width() == 4);
  CHECK(s.global[0] == 0.15);
  CHECK(s.global[1] == 2.0);
  CHECK(s.global[2] == doctest::Approx(0.13));
  CHECK(s.global[3] == doctest::Approx(0.05));
  CHECK(s.global[4] == 1.0);
  CHECK(s.global[5] == 18.0);
  CHECK(s.global[6] == doctest::Approx(0.5));
  // pairs tie on distance to their mean; the lower index wins
  const auto center = block.center_object();
  for (int c = 0; c < 3; ++c) {
    const auto member = block.features.row(2 * c);
    CHECK(s.locals(c, 0) == member(0));
    CHECK(s.locals(c, 1) == member(1));
    CHECK(s.locals(c, 2) == doctest::Approx((member - center).norm()));
    CHECK(s.locals(c, 3) == 2.0);
  }
}

TEST_CASE("action arithmetic and clamping") {
  auto layer = simple_layer();
  const auto right = apply_action({0.10, 5}, Action::kRight, layer);
  CHECK(right.params.eps == doctest::Approx(0.12));
  CHECK_FALSE(right.clamp.any());

  const auto up = apply_action({0.1, 20}, Action::kUp, layer);
  CHECK(up.params.minpts == 20);
  CHECK(up.clamp.minpts_high);
  const auto block = six_points();
  const auto next = build_raw_state(block, up.params, layer, summarize(block, std::vector<int>(6, kNoise)), up.clamp);
  CHECK(next.global[5] == -1.0);

  const auto down = apply_action({0.1, 3}, Action::kDown, layer);
  CHECK(down.params.minpts == 1);
  CHECK(down.clamp.minpts_low);

  const auto stop = apply_action({0.1, 3}, Action::kStop, layer);
  CHECK(stop.params == ParamCombo{0.1, 3});
}

TEST_CASE("an unclamped action followed by its reverse is the identity") {
  std::mt19937_64 rng(3);
  const auto layer = simple_layer();
  for (int t = 0; t < 500; ++t) {
    const ParamCombo p{layer.eps_b1 + (layer.eps_b2 - layer.eps_b1) * (rng() % 1000) / 1000.0,
                       1 + static_cast<int>(rng() % 20)};
    const auto a = static_cast<Action>(rng() % 4);
    const auto there = apply_action(p, a, layer);
    if (there.clamp.any()) continue;
    const auto back = apply_action(there.params, reverse(a), layer);
    CHECK(back.params.eps == doctest::Approx(p.eps).epsilon(1e-12));
    CHECK(back.params.minpts == p.minpts);
  }
}

TEST_CASE("episode reward assembly") {
  const std::vector<double> r = {0.2, 0.8, 0.5};
  const auto a = assemble_episode_rewards(r, 0.2);
  CHECK(a[0] == doctest::Approx(0.74));
  CHECK(a[1] == doctest::Approx(0.74));
  CHECK(a[2] == doctest::Approx(0.50));

  const std::vector<double> flat(7, 0.37);
  for (const double v : assemble_episode_rewards(flat, 0.2)) CHECK(v == doctest::Approx(0.37));
  CHECK_THROWS_AS(assemble_episode_rewards(std::vector<double>{}, 0.2), DataError);
}

TEST_CASE("termination verdicts") {
  RawState ok;
  ok.global = {0.1, 3, 0.1, 0.1, 1, 1, 0};
  RawState clamped = ok;
  clamped.global[3] = -1.0;
  CHECK(check_termination(clamped, Action::kRight, 3, 30) == StopType::kOutOfBounds);
  CHECK(check_termination(clamped, Action::kStop, 30, 30) == StopType::kOutOfBounds);
  CHECK(check_termination(ok, Action::kStop, 1, 30) == StopType::kContinue);
  CHECK(check_termination(ok, Action::kStop, 2, 30) == StopType::kActive);
  CHECK(check_termination(ok, Action::kLeft, 30, 30) == StopType::kTimeout);
  CHECK(check_termination(ok, Action::kStop, 30, 30) == StopType::kTimeout);
  CHECK(check_termination(ok, Action::kUp, 5, 30) == StopType::kContinue);
}

TEST_CASE("clustering environment") {
  const auto block = six_points();
  ClusteringEnvironment unlabeled(block, std::nullopt, 10.0);
  CHECK_THROWS_AS(unlabeled.reward({0.2, 2}), LabelAccessError);
  unlabeled.observe({0.2, 2}, simple_layer(), {});
  unlabeled.observe({0.2, 2}, simple_layer(), {});
  unlabeled.observe({0.3, 2}, simple_layer(), {});
  CHECK(unlabeled.rounds() == 2);

  DataBlock labelled = block;
  labelled.labels = Labels{0, 0, 1, 1, 2, 2};
  ClusteringEnvironment env(labelled, PartialLabels{{0, 1, 2, 3, 4, 5}, {0, 0, 1, 1, 2, 2}, 1.0}, 10.0);
  CHECK(env.reward({0.15, 2}) == doctest::Approx(1.0));
  CHECK(env.reward_queries() == 1);
  CHECK(env.observe({0.15, 2}, simple_layer(), {}).minpts_scale == 10.0);
  CHECK(env.rounds() == 1);
}
