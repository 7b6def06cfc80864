#include "drld/mdp.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drld/error.h"
#include "drld/metrics.h"

namespace drld {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kLeft: return "left";
    case Action::kRight: return "right";
    case Action::kDown: return "down";
    case Action::kUp: return "up";
    case Action::kStop: return "stop";
  }
  return "?";
}

Action reverse(Action a) {
  switch (a) {
    case Action::kLeft: return Action::kRight;
    case Action::kRight: return Action::kLeft;
    case Action::kDown: return Action::kUp;
    case Action::kUp: return Action::kDown;
    case Action::kStop: return Action::kStop;
  }
  return a;
}

std::string_view stop_name(StopType s) {
  switch (s) {
    case StopType::kContinue: return "continue";
    case StopType::kOutOfBounds: return "out";
    case StopType::kTimeout: return "timeout";
    case StopType::kActive: return "active";
  }
  return "?";
}

double RawState::min_boundary_distance() const {
  return std::min({global[2], global[3], global[4], global[5]});
}

RawState build_raw_state(const DataBlock& block, const ParamCombo& params, const LayerSpace& layer,
                         const ClusterOutcome& outcome, const ClampFlags& clamp, double minpts_scale) {
  RawState state;
  const double minpts = params.minpts;
  state.global = {params.eps,
                  minpts,
                  clamp.eps_low ? -1.0 : params.eps - layer.eps_b1,
                  clamp.eps_high ? -1.0 : layer.eps_b2 - params.eps,
                  clamp.minpts_low ? -1.0 : minpts - layer.minpts_b1,
                  clamp.minpts_high ? -1.0 : layer.minpts_b2 - minpts,
                  static_cast<double>(outcome.k) / static_cast<double>(block.rows())};

  const auto d = block.dims();
  state.locals.resize(outcome.k, d + 2);
  for (int c = 0; c < outcome.k; ++c) {
    const auto& summary = outcome.clusters[static_cast<std::size_t>(c)];
    state.locals.row(c).head(d) = summary.center_feature.transpose();
    state.locals(c, d) = summary.center_distance;
    state.locals(c, d + 1) = summary.size;
  }
  state.minpts_scale = minpts_scale;
  state.size_scale = static_cast<double>(block.rows());
  return state;
}

ActionResult apply_action(const ParamCombo& params, Action action, const LayerSpace& layer) {
  ActionResult result{params, {}};
  auto& p = result.params;
  switch (action) {
    case Action::kLeft: p.eps -= layer.theta_eps; break;
    case Action::kRight: p.eps += layer.theta_eps; break;
    case Action::kDown: p.minpts -= layer.theta_minpts; break;
    case Action::kUp: p.minpts += layer.theta_minpts; break;
    case Action::kStop: return result;
  }
  if (p.eps < layer.eps_b1) {
    p.eps = layer.eps_b1;
    result.clamp.eps_low = true;
  } else if (p.eps > layer.eps_b2) {
    p.eps = layer.eps_b2;
    result.clamp.eps_high = true;
  }
  if (p.minpts < layer.minpts_lo()) {
    p.minpts = layer.minpts_lo();
    result.clamp.minpts_low = true;
  } else if (p.minpts > layer.minpts_hi()) {
    p.minpts = layer.minpts_hi();
    result.clamp.minpts_high = true;
  }
  return result;
}

double immediate_reward(const ClusterOutcome& outcome, const PartialLabels& partial) {
  return reward_nmi(outcome, partial);
}

std::vector<double> assemble_episode_rewards(std::span<const double> immediate, double delta) {
  if (immediate.empty()) throw DataError("cannot assemble rewards for an empty episode");
  if (!(delta >= 0.0 && delta <= 1.0)) throw DataError("delta must lie in [0, 1]");
  const double beta = 1.0 - delta;
  const double end_reward = immediate.back();
  std::vector<double> out(immediate.size());
  double future_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = immediate.size(); i-- > 0;) {
    future_max = std::max(future_max, immediate[i]);
    out[i] = beta * future_max + delta * end_reward;
  }
  return out;
}

StopType check_termination(const RawState& state_after, Action action, int step_index, int max_steps) {
  if (state_after.min_boundary_distance() < 0.0) return StopType::kOutOfBounds;
  if (step_index >= max_steps) return StopType::kTimeout;
  if (action == Action::kStop && step_index >= 2) return StopType::kActive;
  return StopType::kContinue;
}

ClusteringEnvironment::ClusteringEnvironment(const DataBlock& block, std::optional<PartialLabels> partial,
                                             double minpts_scale)
    : block_(block), partial_(std::move(partial)), minpts_scale_(minpts_scale) {}

std::shared_ptr<const ClusterOutcome> ClusteringEnvironment::outcome(const ParamCombo& params) {
  return cached_cluster(cache_, block_, params);
}

RawState ClusteringEnvironment::observe(const ParamCombo& params, const LayerSpace& layer,
                                        const ClampFlags& clamp) {
  return build_raw_state(block_, params, layer, *outcome(params), clamp, minpts_scale_);
}

double ClusteringEnvironment::compute_reward(const ParamCombo& params) {
  if (!partial_) throw LabelAccessError("reward requested from an unlabelled environment");
  return immediate_reward(*outcome(params), *partial_);
}

}  // namespace drld
