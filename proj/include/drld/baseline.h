#pragma once

#include <cstdint>
#include <vector>

#include "drld/data.h"
#include "drld/dbscan.h"
#include "drld/space.h"

namespace drld {

struct BaselineResult {
  ParamCombo best_params;
  double best_reward = 0.0;
  std::vector<double> trajectory;       // best reward after each round
  std::vector<ParamCombo> best_so_far;  // best parameters after each round
  std::int64_t rounds_consumed = 0;
};

// Finest lattice of the space: eps = j * eps_min for j = 1..pi_eps^max_layers,
// minpts = 1..minpts_max. Index order is eps-major.
struct Lattice {
  double eps_step = 0.0;
  std::int64_t eps_count = 0;
  int minpts_count = 0;

  static Lattice of(const SpaceBase& base, int max_layers);
  std::int64_t size() const { return eps_count * minpts_count; }
  ParamCombo at(std::int64_t index) const;
};

// Uniform draws from the lattice without replacement, one clustering round
// each, scored by NMI on the partial labels.
BaselineResult random_search(const DataBlock& block, const PartialLabels& partial, std::int64_t budget_rounds,
                             const SpaceBase& base, int max_layers, std::uint64_t seed);

}  // namespace drld
