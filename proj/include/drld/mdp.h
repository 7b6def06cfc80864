#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "drld/data.h"
#include "drld/dbscan.h"
#include "drld/space.h"

namespace drld {

enum class Action : int { kLeft = 0, kRight = 1, kDown = 2, kUp = 3, kStop = 4 };
inline constexpr int kNumActions = 5;

std::string_view action_name(Action a);
Action reverse(Action a);

enum class StopType { kContinue, kOutOfBounds, kTimeout, kActive };
std::string_view stop_name(StopType s);

// Which bound an action ran into; the matching boundary distance reads -1 in
// the next state.
struct ClampFlags {
  bool eps_low = false;
  bool eps_high = false;
  bool minpts_low = false;
  bool minpts_high = false;

  bool any() const { return eps_low || eps_high || minpts_low || minpts_high; }
};

inline constexpr int kGlobalStateSize = 7;

// Global and per-cluster descriptors before neural encoding.
//   global: eps, minpts, eps-B1, B2-eps, minpts-B1, B2-minpts, k/n
//   locals: one row per cluster: center feature (d), center distance, size
struct RawState {
  std::array<double, kGlobalStateSize> global{};
  Eigen::MatrixXd locals;
  // Divisors the encoder applies to MinPts-valued and size-valued inputs.
  double minpts_scale = 1.0;
  double size_scale = 1.0;

  int k() const { return static_cast<int>(locals.rows()); }
  int local_width() const { return static_cast<int>(locals.cols()); }
  double min_boundary_distance() const;
};

struct Transition {
  RawState before;
  Action action = Action::kStop;
  RawState after;
  double reward = 0.0;
};

struct EpisodeStep {
  ParamCombo params;  // parameters after the action
  Action action = Action::kStop;
  double immediate_reward = 0.0;
};

struct EpisodeTrace {
  ParamCombo start;
  std::vector<EpisodeStep> steps;
  StopType stop_type = StopType::kContinue;
  ParamCombo end_params;
};

RawState build_raw_state(const DataBlock& block, const ParamCombo& params, const LayerSpace& layer,
                         const ClusterOutcome& outcome, const ClampFlags& clamp = {},
                         double minpts_scale = 1.0);

struct ActionResult {
  ParamCombo params;
  ClampFlags clamp;
};

// Moves one step; results outside the layer bounds are set to the bound.
// STOP leaves the parameters unchanged.
ActionResult apply_action(const ParamCombo& params, Action action, const LayerSpace& layer);

// NMI of the outcome on the labelled rows.
double immediate_reward(const ClusterOutcome& outcome, const PartialLabels& partial);

// r_i = (1 - delta) * max(R_i..R_I) + delta * R_I.
std::vector<double> assemble_episode_rewards(std::span<const double> immediate, double delta);

// Verdict after step `step_index` (1-based) given the state reached.
// Precedence: out of bounds, timeout, active stop (only from step 2).
StopType check_termination(const RawState& state_after, Action action, int step_index, int max_steps);

// Source of states and rewards for the search. Reward reads are counted so
// label-free runs can prove they never touched a reward.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual RawState observe(const ParamCombo& params, const LayerSpace& layer, const ClampFlags& clamp) = 0;
  virtual bool has_labels() const = 0;
  // Distinct clustering executions so far.
  virtual std::int64_t rounds() const = 0;
  virtual int feature_dims() const = 0;

  double reward(const ParamCombo& params) {
    ++reward_queries_;
    return compute_reward(params);
  }
  std::int64_t reward_queries() const { return reward_queries_; }

 protected:
  virtual double compute_reward(const ParamCombo& params) = 0;

 private:
  std::int64_t reward_queries_ = 0;
};

// DBSCAN-backed environment over one block with a per-run result cache.
class ClusteringEnvironment final : public Environment {
 public:
  ClusteringEnvironment(const DataBlock& block, std::optional<PartialLabels> partial, double minpts_scale);

  RawState observe(const ParamCombo& params, const LayerSpace& layer, const ClampFlags& clamp) override;
  bool has_labels() const override { return partial_.has_value(); }
  std::int64_t rounds() const override { return cache_.misses(); }
  int feature_dims() const override { return static_cast<int>(block_.dims()); }

  std::shared_ptr<const ClusterOutcome> outcome(const ParamCombo& params);
  const ResultCache& cache() const { return cache_; }
  const DataBlock& block() const { return block_; }

 protected:
  double compute_reward(const ParamCombo& params) override;

 private:
  const DataBlock& block_;
  std::optional<PartialLabels> partial_;
  double minpts_scale_;
  ResultCache cache_;
};

}  // namespace drld
