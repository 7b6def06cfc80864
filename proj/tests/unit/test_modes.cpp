#include <doctest.h>

#include <cmath>

#include "drld/error.h"
#include "drld/metrics.h"
#include "drld/modes.h"

using namespace drld;

namespace {

std::vector<DataBlock> stream(int blocks, int rows = 120, std::uint64_t seed = 3) {
  SyntheticStreamSpec spec;
  spec.num_blocks = blocks;
  spec.rows_per_block = rows;
  spec.seed = seed;
  return partition_stream(synthetic_stream(spec), blocks);
}

ModeConfig quick() {
  ModeConfig c;
  c.agent.hidden = 16;
  c.budget.max_layers = 2;
  c.budget.max_steps = 8;
  c.search_episodes = 3;
  c.budget.max_episodes = 3;
  c.pretrain_episodes = 3;
  c.seeds = {1, 2};
  c.threads = 2;
  return c;
}

}  // namespace

TEST_CASE("mode names round trip") {
  for (const Mode m : {Mode::kRetrain, Mode::kContinue, Mode::kPretrainTest, Mode::kMaintainTest}) {
    CHECK(parse_mode(mode_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_mode("warm"), ConfigError);
}

TEST_CASE("retrain is reproducible per seed") {
  const auto blocks = stream(2);
  auto c = quick();
  c.seeds = {4, 4};
  const auto report = run_retrain(blocks, c);
  REQUIRE(report.rows.size() == 4);
  for (const std::size_t b : {0u, 1u}) {
    const auto& x = report.rows[b];
    const auto& y = report.rows[b + 2];
    CHECK(x.block == y.block);
    CHECK(x.params == y.params);
    CHECK(x.nmi == y.nmi);
    CHECK(x.rounds == y.rounds);
  }
  c.threads = 1;
  const auto serial = run_retrain(blocks, c);
  for (std::size_t i = 0; i < 4; ++i) CHECK(serial.rows[i].params == report.rows[i].params);
}

TEST_CASE("retrain reports full-label scores of the best point") {
  const auto blocks = stream(1);
  const auto report = run_retrain(blocks, quick());
  for (const auto& r : report.rows) {
    const auto out = cluster(blocks[0], r.params);
    CHECK(r.nmi == doctest::Approx(nmi(*blocks[0].labels, out.assignment)));
    CHECK(r.ari == doctest::Approx(ari(*blocks[0].labels, out.assignment)));
    CHECK(r.reward.has_value());
    CHECK(r.rounds > 0);
    CHECK(r.mode == "retrain");
  }
}

TEST_CASE("modes that train require labels") {
  auto blocks = stream(1);
  blocks[0].labels.reset();
  CHECK_THROWS_AS(run_retrain(blocks, quick()), DataError);
}

TEST_CASE("pretrain-test reads no rewards and repeats exactly") {
  const auto blocks = stream(4);
  const auto c = quick();
  const std::vector<DataBlock> head(blocks.begin(), blocks.begin() + 2), tail(blocks.begin() + 2, blocks.end());
  const std::vector<LayerBundles> agents = {run_pretrain(head, c, 1)};
  const auto a = run_pretrain_test(tail, agents, c);
  const auto b = run_pretrain_test(tail, agents, c);
  REQUIRE(a.rows.size() == 4);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].reward_queries == 0);
    CHECK_FALSE(a.rows[i].reward.has_value());
    CHECK(a.rows[i].params == b.rows[i].params);
  }

  auto unlabeled = tail;
  for (auto& blk : unlabeled) blk.labels.reset();
  const auto u = run_pretrain_test(unlabeled, agents, c);
  CHECK(std::isnan(u.rows[0].nmi));
  CHECK(u.rows[0].params == a.rows[0].params);
}

TEST_CASE("maintain-test only learns from blocks already seen") {
  const auto blocks = stream(5);
  const auto c = quick();
  const std::vector<DataBlock> head(blocks.begin(), blocks.begin() + 2);
  const std::vector<LayerBundles> agents = {run_pretrain(head, c, 1)};
  const std::vector<DataBlock> tail(blocks.begin() + 2, blocks.end());
  const auto full = run_maintain_test(tail, agents, c);

  // relabelling the last block cannot change its own test result
  auto relabeled = tail;
  for (auto& v : *relabeled.back().labels) v = (v + 1) % 4;
  const auto other = run_maintain_test(relabeled, agents, c);
  const std::vector<DataBlock> shorter(tail.begin(), tail.end() - 1);
  const auto prefix = run_maintain_test(shorter, agents, c);

  const std::size_t per_seed = tail.size();
  for (std::size_t s = 0; s < c.seeds.size(); ++s) {
    for (std::size_t b = 0; b < per_seed; ++b) {
      CHECK(full.rows[s * per_seed + b].params == other.rows[s * per_seed + b].params);
      CHECK(full.rows[s * per_seed + b].reward_queries == 0);
    }
    for (std::size_t b = 0; b + 1 < per_seed; ++b) {
      CHECK(full.rows[s * per_seed + b].params == prefix.rows[s * (per_seed - 1) + b].params);
    }
  }
  // the caller's agents are left untouched
  CHECK(run_pretrain_test(tail, agents, c).rows[0].params == run_pretrain_test(tail, agents, c).rows[0].params);
}

TEST_CASE("continue carries agents across blocks") {
  const auto blocks = stream(3);
  auto c = quick();
  const std::vector<LayerBundles> agents = {run_pretrain({blocks[0]}, c, 1)};
  const std::vector<DataBlock> tail(blocks.begin() + 1, blocks.end());
  const auto report = run_continue(tail, agents, c);
  CHECK(report.rows.size() == 4);
  c.carry_buffer = false;
  CHECK(run_continue(tail, agents, c).rows.size() == 4);
  CHECK_THROWS_AS(run_continue(tail, {agents[0], agents[0], agents[0]}, c), ConfigError);
}

TEST_CASE("random baseline rows spend the whole budget") {
  const auto blocks = stream(1, 200);
  const auto c = quick();
  const auto report = run_random_baseline(blocks, c, 5);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].mode == "random");
  CHECK(report.rows[0].rounds == 5);
  CHECK(report.rows[0].curve.size() == 5);
}

TEST_CASE("aggregates are recomputable from rows") {
  RunReport r;
  r.rows = {RunRow{1, 0, "retrain", 0.5, 0.2, {}, 10},
            RunRow{1, 1, "retrain", 0.7, 0.4, {}, 20},
            RunRow{2, 0, "retrain", 0.9, 0.9, {}, 5}};
  const auto agg = r.aggregates();
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].block == 1);
  CHECK(agg[0].runs == 2);
  CHECK(agg[0].nmi_mean == doctest::Approx(0.6));
  CHECK(agg[0].nmi_std == doctest::Approx(0.1));
  CHECK(agg[0].rounds_mean == doctest::Approx(15));
  CHECK(agg[1].nmi_std == 0.0);
  CHECK(r.mean_nmi("retrain") == doctest::Approx(0.7));
}

TEST_CASE("config validation") {
  auto c = quick();
  c.label_proportion = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = quick();
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("parallel_for propagates failures") {
  CHECK_THROWS_AS(parallel_for(8, 4, [](std::size_t i) {
                    if (i == 5) throw DataError("boom");
                  }),
                  DataError);
  std::vector<int> hit(100, 0);
  parallel_for(100, 3, [&](std::size_t i) { hit[i] = 1; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
}
