#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "drld/config.h"
#include "drld/error.h"
#include "drld/report.h"

using namespace drld;

namespace {

std::string field_of(const std::string& json) {
  try {
    config_from_json(json, RunConfig::offline_defaults()).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

RunReport sample() {
  RunReport r;
  r.dataset = "toy";
  RunRow a{1, 0, "retrain", 0.8125, 0.5, {0.125, 7}, 42};
  a.curve = {{1, 0.25}, {3, 0.8125}};
  a.reward = 0.75;
  RunRow b{2, 3, "pretrain_test", std::numeric_limits<double>::quiet_NaN(),
           std::numeric_limits<double>::quiet_NaN(), {0.0566, 3}, 4};
  r.rows = {a, b};
  return r;
}

}  // namespace

TEST_CASE("defaults per setting") {
  const auto off = RunConfig::offline_defaults();
  CHECK(off.mode.mode == Mode::kRetrain);
  CHECK(off.mode.seeds.size() == 10);
  CHECK(off.mode.budget.max_layers == 3);
  CHECK(off.mode.minpts_factor == 0.25);
  CHECK(off.mode.budget.max_episodes == 15);
  CHECK(off.mode.budget.max_steps == 30);
  const auto on = RunConfig::online_defaults();
  CHECK(on.mode.mode == Mode::kMaintainTest);
  CHECK(on.mode.budget.max_layers == 6);
  CHECK(on.mode.minpts_factor == 0.0025);
  CHECK(on.num_blocks == 16);
  CHECK(on.pretrain_blocks == 8);
}

TEST_CASE("json overrides only the keys it names") {
  const auto c = config_from_json(R"({"max_episodes": 7, "seeds": [5, 6], "mode": "continue", "delta": 0.5})",
                                   RunConfig::offline_defaults());
  CHECK(c.mode.budget.max_episodes == 7);
  CHECK(c.mode.seeds == std::vector<std::uint64_t>{5, 6});
  CHECK(c.mode.mode == Mode::kContinue);
  CHECK(c.mode.budget.delta == 0.5);
  CHECK(c.mode.budget.max_steps == 30);
  CHECK(c.mode.pi_eps == 5);
}

TEST_CASE("bad config values are reported by field") {
  CHECK(field_of(R"({"max_epsiodes": 7})") == "max_epsiodes");
  CHECK(field_of(R"({"max_steps": "many"})") == "max_steps");
  CHECK(field_of(R"({"delta": 1.5})") == "delta");
  CHECK(field_of(R"({"label_proportion": 0})") == "label_proportion");
  CHECK(field_of(R"({"mode": "sometimes"})") == "mode");
  CHECK(field_of(R"({"encoder_training": "partial"})") == "encoder_training");
  CHECK(field_of(R"({"pretrain_blocks": 20})") == "pretrain_blocks");
  CHECK(field_of(R"({"max_layers": 3})").empty());
  CHECK_THROWS_AS(config_from_json("[1, 2", RunConfig::offline_defaults()), ConfigError);
}

TEST_CASE("config json round trips") {
  auto c = RunConfig::online_defaults();
  c.datasets = {"a.csv", "b.csv"};
  c.mode.seeds = {9};
  c.mode.agent.tau = 0.01;
  const auto back = config_from_json(config_to_json(c), RunConfig::offline_defaults());
  CHECK(back.datasets == c.datasets);
  CHECK(back.mode.mode == c.mode.mode);
  CHECK(back.mode.seeds == c.mode.seeds);
  CHECK(back.mode.agent.tau == 0.01);
  CHECK(back.mode.budget.max_layers == 6);
  CHECK(back.mode.minpts_factor == 0.0025);
}

TEST_CASE("report csv schema") {
  const auto csv = report_csv(sample());
  CHECK(csv ==
        "block,seed,mode,nmi,ari,eps,minpts,rounds\n"
        "1,0,retrain,0.812500,0.500000,0.125,7,42\n"
        "2,3,pretrain_test,nan,nan,0.0566,3,4\n");
  CHECK(report_csv(sample()) == csv);
}

TEST_CASE("curve csv lists every sample") {
  const auto csv = curve_csv(sample());
  CHECK(csv.rfind("round,best_nmi,seed,method\n", 0) == 0);
  CHECK(csv.find("1,0.250000,0,retrain\n") != std::string::npos);
  CHECK(csv.find("3,0.812500,0,retrain\n") != std::string::npos);
}

TEST_CASE("report json round trips") {
  const auto original = sample();
  const auto back = report_from_json(report_json(original));
  CHECK(back.dataset == "toy");
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].params == original.rows[0].params);
  CHECK(back.rows[0].nmi == original.rows[0].nmi);
  CHECK(*back.rows[0].reward == 0.75);
  CHECK(back.rows[0].curve.size() == 2);
  CHECK(std::isnan(back.rows[1].nmi));
  CHECK_FALSE(back.rows[1].reward.has_value());
  CHECK(report_csv(back) == report_csv(original));
}

TEST_CASE("write_text creates directories") {
  const auto dir = std::filesystem::temp_directory_path() / "drld_report_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_text((dir / "x.txt").string(), "hello");
  CHECK(read_text((dir / "x.txt").string()) == "hello");
  std::filesystem::remove_all(dir.parent_path());
  CHECK_THROWS_AS(read_text((dir / "missing.txt").string()), Error);
}

TEST_CASE("merging reports appends rows") {
  auto a = sample();
  merge_reports(a, sample());
  CHECK(a.rows.size() == 4);
}
