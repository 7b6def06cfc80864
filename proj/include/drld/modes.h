#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drld/agent.h"
#include "drld/baseline.h"
#include "drld/data.h"
#include "drld/search.h"

namespace drld {

enum class Mode { kRetrain, kContinue, kPretrainTest, kMaintainTest };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);  // throws ConfigError("mode", ...)

struct ModeConfig {
  Mode mode = Mode::kRetrain;
  int pretrain_episodes = 50;
  int search_episodes = 15;
  std::vector<std::uint64_t> seeds{0};
  double label_proportion = 0.2;
  SearchBudget budget;
  int pi_eps = 5;
  int pi_minpts = 4;
  double minpts_factor = 0.25;
  AgentConfig agent;
  bool carry_buffer = true;  // continuous training keeps replay memory across blocks
  int threads = 1;

  void validate() const;
  SpaceBase space_for(const DataBlock& block) const;
};

struct CurveSample {
  std::int64_t round = 0;
  double best_nmi = 0.0;
};

struct RunRow {
  int block = 1;
  std::uint64_t seed = 0;
  std::string mode;
  double nmi = 0.0;  // NaN when the block has no ground truth
  double ari = 0.0;
  ParamCombo params;
  std::int64_t rounds = 0;
  std::optional<double> reward;  // partial-label NMI of the reported point (training only)
  std::int64_t reward_queries = 0;
  std::vector<CurveSample> curve;
};

struct Aggregate {
  int block = 1;
  std::string mode;
  int runs = 0;
  double nmi_mean = 0.0, nmi_std = 0.0;
  double ari_mean = 0.0, ari_std = 0.0;
  double rounds_mean = 0.0;
};

struct RunReport {
  std::string dataset;
  std::vector<RunRow> rows;

  // Population standard deviation over seeds, per (mode, block).
  std::vector<Aggregate> aggregates() const;
  // Mean over every row of the given mode.
  double mean_nmi(std::string_view mode) const;
};

// One set of per-layer agents.
using LayerBundles = std::vector<AgentBundle>;

RunReport run_retrain(const std::vector<DataBlock>& blocks, const ModeConfig& config);

// Sequential training over the blocks with pretrain_episodes per layer and no
// early stop; returns the trained per-layer agents.
LayerBundles run_pretrain(const std::vector<DataBlock>& blocks, const ModeConfig& config, std::uint64_t seed);

// `agents` holds one LayerBundles per seed in config.seeds, or a single entry
// shared by all seeds. Inputs are copied; the caller's agents are unchanged.
RunReport run_continue(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                       const ModeConfig& config);
RunReport run_pretrain_test(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                            const ModeConfig& config);
RunReport run_maintain_test(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                            const ModeConfig& config);

RunReport run_mode(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                   const ModeConfig& config);

// Random search with the same space and a fixed round budget per (block, seed).
RunReport run_random_baseline(const std::vector<DataBlock>& blocks, const ModeConfig& config,
                              std::int64_t budget_rounds);

// Full-label NMI of each curve point (NaN-free only for labelled blocks).
std::vector<CurveSample> evaluate_curve(const DataBlock& block, const std::vector<CurvePoint>& curve);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace drld
