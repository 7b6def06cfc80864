#include "drld/search.h"

#include <limits>

#include "drld/error.h"
#include "drld/seeding.h"

namespace drld {

namespace {

void record(std::vector<CurvePoint>* curve, const Environment& env, const ParamCombo& params) {
  if (!curve) return;
  const auto round = env.rounds();
  if (!curve->empty() && curve->back().round == round) {
    curve->back().params = params;
    return;
  }
  curve->push_back({round, params});
}

}  // namespace

void SearchBudget::validate() const {
  if (max_episodes < 1) throw ConfigError("max_episodes", "must be at least 1");
  if (max_steps < 1) throw ConfigError("max_steps", "must be at least 1");
  if (max_layers < 1) throw ConfigError("max_layers", "must be at least 1");
  if (episode_patience < 1) throw ConfigError("episode_patience", "must be at least 1");
  if (layer_patience < 1) throw ConfigError("layer_patience", "must be at least 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("delta", "must lie in [0, 1]");
}

LayerTrace run_layer_training(AgentBundle& bundle, Environment& env, const LayerSpace& space, const ParamCombo& start,
                              const SearchBudget& budget, std::mt19937_64& rng, std::vector<CurvePoint>* curve) {
  if (!env.has_labels()) throw LabelAccessError("training needs partial labels");
  LayerTrace trace;
  trace.layer = space.layer;
  trace.space = space;
  trace.start = start;
  trace.best_params = start;
  double best = env.reward(start);
  trace.best_reward = best;
  record(curve, env, trace.best_params);

  int stale = 0;
  for (int e = 0; e < budget.max_episodes; ++e) {
    EpisodeTrace episode;
    episode.start = start;
    ParamCombo p = start;
    RawState state = env.observe(p, space, {});
    std::vector<Transition> pending;
    std::vector<double> immediate;
    bool improved = false;

    for (int i = 1; i <= budget.max_steps; ++i) {
      const Action a = act(state, bundle, true, rng);
      const ActionResult moved = apply_action(p, a, space);
      const double r = env.reward(moved.params);
      RawState next = env.observe(moved.params, space, moved.clamp);
      ++bundle.env_steps;

      episode.steps.push_back({moved.params, a, r});
      immediate.push_back(r);
      if (r > best) {
        best = r;
        trace.best_params = moved.params;
        improved = true;
      }
      record(curve, env, trace.best_params);

      const StopType verdict = check_termination(next, a, i, budget.max_steps);
      pending.push_back({std::move(state), a, next, 0.0});
      state = std::move(next);
      p = moved.params;
      if (verdict != StopType::kContinue) {
        episode.stop_type = verdict;
        break;
      }
    }
    episode.end_params = p;

    const auto assembled = assemble_episode_rewards(immediate, budget.delta);
    for (std::size_t i = 0; i < pending.size(); ++i) {
      pending[i].reward = assembled[i];
      store(bundle, std::move(pending[i]));
    }
    for (std::size_t i = 0; i < immediate.size(); ++i) {
      update(bundle, bundle.config.batch_size, bundle.config.gamma, bundle.config.tau);
    }
    trace.episodes.push_back(std::move(episode));

    stale = improved ? 0 : stale + 1;
    if (budget.early_stop && stale >= budget.episode_patience) break;
  }
  trace.best_reward = best;
  trace.end_params = trace.episodes.back().end_params;
  return trace;
}

LayerTrace run_layer_testing(const AgentBundle& bundle, Environment& env, const LayerSpace& space,
                             const ParamCombo& start, const SearchBudget& budget, std::vector<CurvePoint>* curve) {
  LayerTrace trace;
  trace.layer = space.layer;
  trace.space = space;
  trace.start = start;

  EpisodeTrace episode;
  episode.start = start;
  ParamCombo p = start;
  RawState state = env.observe(p, space, {});
  record(curve, env, p);
  std::mt19937_64 unused(0);
  for (int i = 1; i <= budget.max_steps; ++i) {
    const Action a = act(state, bundle, false, unused);
    const ActionResult moved = apply_action(p, a, space);
    state = env.observe(moved.params, space, moved.clamp);
    p = moved.params;
    episode.steps.push_back({p, a, 0.0});
    record(curve, env, p);
    const StopType verdict = check_termination(state, a, i, budget.max_steps);
    if (verdict != StopType::kContinue) {
      episode.stop_type = verdict;
      break;
    }
  }
  episode.end_params = p;
  trace.end_params = p;
  trace.best_params = p;
  trace.episodes.push_back(std::move(episode));
  return trace;
}

SearchResult search(Environment& env, const SpaceBase& base, std::vector<AgentBundle>& bundles,
                    const SearchBudget& budget, SearchMode mode, std::uint64_t seed, int block_index) {
  budget.validate();
  if (static_cast<int>(bundles.size()) < budget.max_layers) {
    throw ConfigError("max_layers", "needs one agent per layer (" + std::to_string(bundles.size()) + " given)");
  }
  if (mode == SearchMode::kTrain && !env.has_labels()) throw LabelAccessError("training needs partial labels");

  const auto queries_before = env.reward_queries();
  SearchResult result;
  ParamCombo anchor = base.midpoint();
  double global_best = -std::numeric_limits<double>::infinity();
  result.best_params = anchor;
  int stale = 0;

  for (int l = 1; l <= budget.max_layers; ++l) {
    const LayerSpace space = layer_space(l, anchor, base);
    AgentBundle& bundle = bundles[static_cast<std::size_t>(l - 1)];
    if (mode == SearchMode::kTrain) {
      std::mt19937_64 rng(derive_seed(seed, block_index, l, StreamPurpose::kExplore));
      LayerTrace trace = run_layer_training(bundle, env, space, anchor, budget, rng, &result.curve);
      const double layer_best = *trace.best_reward;
      if (layer_best > global_best) {
        global_best = layer_best;
        result.best_params = trace.best_params;
        stale = 0;
      } else {
        ++stale;
      }
      anchor = result.best_params;
      result.end_params = trace.end_params;
      for (const auto& ep : trace.episodes) result.steps_taken += static_cast<std::int64_t>(ep.steps.size());
      result.layers.push_back(std::move(trace));
      if (budget.early_stop && stale >= budget.layer_patience) break;
    } else {
      LayerTrace trace = run_layer_testing(bundle, env, space, anchor, budget, &result.curve);
      anchor = trace.end_params;
      result.end_params = anchor;
      result.best_params = anchor;
      result.steps_taken += static_cast<std::int64_t>(trace.episodes.back().steps.size());
      result.layers.push_back(std::move(trace));
    }
  }
  if (mode == SearchMode::kTrain) result.best_reward = global_best;
  result.rounds_consumed = env.rounds();
  result.reward_queries = env.reward_queries() - queries_before;
  return result;
}

std::vector<AgentBundle> make_bundles(const AgentConfig& config, int dims, int layers, std::uint64_t seed,
                                      int block_index) {
  AgentConfig c = config;
  c.local_width = dims + 2;
  std::vector<AgentBundle> bundles;
  bundles.reserve(static_cast<std::size_t>(layers));
  for (int l = 1; l <= layers; ++l) bundles.emplace_back(c, derive_seed(seed, block_index, l, StreamPurpose::kInit));
  return bundles;
}

}  // namespace drld
