#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "drld/agent.h"
#include "drld/mdp.h"
#include "drld/space.h"

namespace drld {

struct SearchBudget {
  int max_episodes = 15;  // per layer
  int max_steps = 30;     // per episode
  int max_layers = 3;
  int episode_patience = 3;  // episodes without improvement before a layer ends
  int layer_patience = 1;    // layers without improvement before the search ends
  bool early_stop = true;
  double delta = 0.2;

  // Throws ConfigError naming the first bad field.
  void validate() const;
};

enum class SearchMode { kTrain, kTest };

struct LayerTrace {
  int layer = 1;
  LayerSpace space;
  ParamCombo start;
  std::vector<EpisodeTrace> episodes;
  ParamCombo best_params;            // training: best visited point of the layer
  std::optional<double> best_reward;
  ParamCombo end_params;             // testing: where the greedy episode ended
};

// Parameters the search would report after a given number of clustering rounds.
struct CurvePoint {
  std::int64_t round = 0;
  ParamCombo params;
};

struct SearchResult {
  ParamCombo best_params;
  std::optional<double> best_reward;  // absent in testing
  ParamCombo end_params;
  std::int64_t rounds_consumed = 0;
  std::int64_t steps_taken = 0;
  std::int64_t reward_queries = 0;
  std::vector<LayerTrace> layers;
  std::vector<CurvePoint> curve;

  // Training reports the best point, testing the final end point.
  const ParamCombo& reported(SearchMode mode) const { return mode == SearchMode::kTrain ? best_params : end_params; }
};

// Up to max_episodes exploring episodes from `start`, one agent update per
// environment step once the buffer holds a full batch. The layer optimum is
// seeded with the reward of `start`; later points replace it only when
// strictly better, so ties keep the earliest visit.
LayerTrace run_layer_training(AgentBundle& bundle, Environment& env, const LayerSpace& space, const ParamCombo& start,
                              const SearchBudget& budget, std::mt19937_64& rng,
                              std::vector<CurvePoint>* curve = nullptr);

// One greedy episode without updates or reward reads.
LayerTrace run_layer_testing(const AgentBundle& bundle, Environment& env, const LayerSpace& space,
                             const ParamCombo& start, const SearchBudget& budget,
                             std::vector<CurvePoint>* curve = nullptr);

// Layer-by-layer search; bundles[l - 1] drives layer l. Training throws
// LabelAccessError when the environment has no labels.
SearchResult search(Environment& env, const SpaceBase& base, std::vector<AgentBundle>& bundles,
                    const SearchBudget& budget, SearchMode mode, std::uint64_t seed, int block_index = 1);

// Fresh per-layer bundles for a block with `dims` features.
std::vector<AgentBundle> make_bundles(const AgentConfig& config, int dims, int layers, std::uint64_t seed,
                                      int block_index = 1);

}  // namespace drld
