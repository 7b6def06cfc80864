#include "drld/baseline.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "drld/error.h"
#include "drld/metrics.h"

namespace drld {

Lattice Lattice::of(const SpaceBase& base, int max_layers) {
  Lattice l;
  l.eps_step = theta_eps(base, max_layers);
  l.eps_count = static_cast<std::int64_t>(std::floor(base.eps_max / l.eps_step + 1e-9));
  l.minpts_count = base.minpts_max - base.minpts_min + 1;
  return l;
}

ParamCombo Lattice::at(std::int64_t index) const {
  const std::int64_t j = index / minpts_count;
  const int m = static_cast<int>(index % minpts_count);
  return {static_cast<double>(j + 1) * eps_step, m + 1};
}

BaselineResult random_search(const DataBlock& block, const PartialLabels& partial, std::int64_t budget_rounds,
                             const SpaceBase& base, int max_layers, std::uint64_t seed) {
  if (budget_rounds < 1) throw ConfigError("baseline_rounds", "must be at least 1");
  const Lattice lattice = Lattice::of(base, max_layers);
  const std::int64_t draws = std::min(budget_rounds, lattice.size());

  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> all(static_cast<std::size_t>(lattice.size()));
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::int64_t> picks;
  picks.reserve(static_cast<std::size_t>(draws));
  std::sample(all.begin(), all.end(), std::back_inserter(picks), draws, rng);
  std::shuffle(picks.begin(), picks.end(), rng);

  BaselineResult result;
  ResultCache cache;
  double best = -1.0;
  for (const auto index : picks) {
    const ParamCombo p = lattice.at(index);
    const double r = reward_nmi(*cached_cluster(cache, block, p), partial);
    if (r > best) {
      best = r;
      result.best_params = p;
    }
    result.trajectory.push_back(best);
    result.best_so_far.push_back(result.best_params);
  }
  result.best_reward = best;
  result.rounds_consumed = cache.misses();
  return result;
}

}  // namespace drld
