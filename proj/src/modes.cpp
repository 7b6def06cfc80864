#include "drld/modes.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "drld/error.h"
#include "drld/metrics.h"
#include "drld/seeding.h"

namespace drld {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_labels(const DataBlock& block) {
  if (!block.labels) throw DataError("block " + std::to_string(block.block_index) + " has no labels");
}

PartialLabels partial_for(const DataBlock& block, const ModeConfig& config, std::uint64_t seed) {
  require_labels(block);
  return mask_labels(block, config.label_proportion, derive_seed(seed, block.block_index, 0, StreamPurpose::kMask));
}

double minpts_scale(const SpaceBase& base) { return static_cast<double>(base.minpts_max); }

RunRow evaluate(const DataBlock& block, std::uint64_t seed, Mode mode, const SearchResult& result,
                SearchMode search_mode) {
  RunRow row;
  row.block = block.block_index;
  row.seed = seed;
  row.mode = std::string(mode_name(mode));
  row.params = result.reported(search_mode);
  row.rounds = result.rounds_consumed;
  row.reward = result.best_reward;
  row.reward_queries = result.reward_queries;
  if (block.labels) {
    const auto outcome = cluster(block, row.params);
    row.nmi = nmi(*block.labels, outcome.assignment);
    row.ari = ari(*block.labels, outcome.assignment);
  } else {
    row.nmi = kNaN;
    row.ari = kNaN;
  }
  row.curve = evaluate_curve(block, result.curve);
  return row;
}

SearchBudget with_episodes(const SearchBudget& budget, int episodes, bool early_stop) {
  SearchBudget b = budget;
  b.max_episodes = episodes;
  b.early_stop = early_stop;
  return b;
}

const LayerBundles& agents_for(const std::vector<LayerBundles>& agents, std::size_t seed_index) {
  if (agents.empty()) throw ConfigError("checkpoints", "no pretrained agents supplied");
  return agents.size() == 1 ? agents.front() : agents.at(seed_index);
}

void check_agents(const std::vector<LayerBundles>& agents, const ModeConfig& config) {
  if (agents.size() != 1 && agents.size() != config.seeds.size()) {
    throw ConfigError("checkpoints", "need one agent set per seed or a single shared set");
  }
  for (const auto& a : agents) {
    if (static_cast<int>(a.size()) < config.budget.max_layers) {
      throw ConfigError("max_layers", "checkpoint has fewer layers than max_layers");
    }
  }
}

// Runs `per_seed(seed_index)` for every seed and concatenates rows in seed order.
RunReport by_seed(const ModeConfig& config, const std::function<std::vector<RunRow>(std::size_t)>& per_seed) {
  std::vector<std::vector<RunRow>> out(config.seeds.size());
  parallel_for(config.seeds.size(), config.threads, [&](std::size_t i) { out[i] = per_seed(i); });
  RunReport report;
  for (auto& rows : out) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }
  return report;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  const double m = mean(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::kRetrain: return "retrain";
    case Mode::kContinue: return "continue";
    case Mode::kPretrainTest: return "pretrain_test";
    case Mode::kMaintainTest: return "maintain_test";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (const Mode m : {Mode::kRetrain, Mode::kContinue, Mode::kPretrainTest, Mode::kMaintainTest}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("mode", "unknown mode '" + std::string(name) + "'");
}

void ModeConfig::validate() const {
  budget.validate();
  if (pretrain_episodes < 1) throw ConfigError("pretrain_episodes", "must be at least 1");
  if (search_episodes < 1) throw ConfigError("search_episodes", "must be at least 1");
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  if (!(label_proportion > 0.0 && label_proportion <= 1.0)) throw ConfigError("label_proportion", "must lie in (0, 1]");
  if (pi_eps < 1) throw ConfigError("pi_eps", "must be at least 1");
  if (pi_minpts < 1) throw ConfigError("pi_minpts", "must be at least 1");
  if (!(minpts_factor > 0.0 && minpts_factor <= 1.0)) throw ConfigError("minpts_factor", "must lie in (0, 1]");
  if (threads < 1) throw ConfigError("threads", "must be at least 1");
  if (!(agent.learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (!(agent.momentum >= 0.0 && agent.momentum < 1.0)) throw ConfigError("momentum", "must lie in [0, 1)");
  if (!(agent.gamma >= 0.0 && agent.gamma <= 1.0)) throw ConfigError("gamma", "must lie in [0, 1]");
  if (!(agent.tau > 0.0 && agent.tau <= 1.0)) throw ConfigError("tau", "must lie in (0, 1]");
  if (agent.batch_size < 1) throw ConfigError("batch_size", "must be at least 1");
  if (agent.hidden < 1) throw ConfigError("hidden", "must be at least 1");
}

SpaceBase ModeConfig::space_for(const DataBlock& block) const {
  return SpaceBase::make(static_cast<int>(block.dims()), static_cast<long>(block.rows()), minpts_factor, pi_eps,
                         pi_minpts, budget.max_layers);
}

std::vector<Aggregate> RunReport::aggregates() const {
  std::map<std::pair<std::string, int>, std::vector<const RunRow*>> groups;
  for (const auto& r : rows) groups[{r.mode, r.block}].push_back(&r);
  std::vector<Aggregate> out;
  for (const auto& [key, members] : groups) {
    std::vector<double> n, a, rounds;
    for (const auto* r : members) {
      n.push_back(r->nmi);
      a.push_back(r->ari);
      rounds.push_back(static_cast<double>(r->rounds));
    }
    Aggregate g;
    g.mode = key.first;
    g.block = key.second;
    g.runs = static_cast<int>(members.size());
    g.nmi_mean = mean(n);
    g.nmi_std = stddev(n);
    g.ari_mean = mean(a);
    g.ari_std = stddev(a);
    g.rounds_mean = mean(rounds);
    out.push_back(g);
  }
  return out;
}

double RunReport::mean_nmi(std::string_view mode) const {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.mode == mode) v.push_back(r.nmi);
  }
  return mean(v);
}

std::vector<CurveSample> evaluate_curve(const DataBlock& block, const std::vector<CurvePoint>& curve) {
  std::vector<CurveSample> out;
  if (!block.labels) return out;
  ResultCache cache;
  for (const auto& point : curve) {
    out.push_back({point.round, nmi(*block.labels, cached_cluster(cache, block, point.params)->assignment)});
  }
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

RunReport run_retrain(const std::vector<DataBlock>& blocks, const ModeConfig& config) {
  config.validate();
  for (const auto& b : blocks) require_labels(b);
  const auto budget = with_episodes(config.budget, config.search_episodes, config.budget.early_stop);

  const std::size_t jobs = blocks.size() * config.seeds.size();
  std::vector<RunRow> rows(jobs);
  parallel_for(jobs, config.threads, [&](std::size_t job) {
    const std::size_t s = job / blocks.size();
    const auto& block = blocks[job % blocks.size()];
    const auto seed = config.seeds[s];
    const SpaceBase base = config.space_for(block);
    ClusteringEnvironment env(block, partial_for(block, config, seed), minpts_scale(base));
    auto bundles = make_bundles(config.agent, static_cast<int>(block.dims()), budget.max_layers, seed,
                                block.block_index);
    const auto result = search(env, base, bundles, budget, SearchMode::kTrain, seed, block.block_index);
    rows[job] = evaluate(block, seed, Mode::kRetrain, result, SearchMode::kTrain);
  });
  RunReport report;
  report.rows = std::move(rows);
  return report;
}

LayerBundles run_pretrain(const std::vector<DataBlock>& blocks, const ModeConfig& config, std::uint64_t seed) {
  config.validate();
  if (blocks.empty()) throw DataError("no pretraining blocks");
  const auto budget = with_episodes(config.budget, config.pretrain_episodes, false);
  auto bundles = make_bundles(config.agent, static_cast<int>(blocks.front().dims()), budget.max_layers, seed, 0);
  for (const auto& block : blocks) {
    const SpaceBase base = config.space_for(block);
    ClusteringEnvironment env(block, partial_for(block, config, seed), minpts_scale(base));
    search(env, base, bundles, budget, SearchMode::kTrain, seed, block.block_index);
  }
  return bundles;
}

RunReport run_continue(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                       const ModeConfig& config) {
  config.validate();
  check_agents(agents, config);
  for (const auto& b : blocks) require_labels(b);
  const auto budget = with_episodes(config.budget, config.search_episodes, config.budget.early_stop);
  return by_seed(config, [&](std::size_t s) {
    const auto seed = config.seeds[s];
    LayerBundles bundles = agents_for(agents, s);
    std::vector<RunRow> rows;
    for (const auto& block : blocks) {
      if (!config.carry_buffer) {
        for (auto& b : bundles) b.buffer.clear();
      }
      const SpaceBase base = config.space_for(block);
      ClusteringEnvironment env(block, partial_for(block, config, seed), minpts_scale(base));
      const auto result = search(env, base, bundles, budget, SearchMode::kTrain, seed, block.block_index);
      rows.push_back(evaluate(block, seed, Mode::kContinue, result, SearchMode::kTrain));
    }
    return rows;
  });
}

RunReport run_pretrain_test(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                            const ModeConfig& config) {
  config.validate();
  check_agents(agents, config);
  const std::size_t jobs = blocks.size() * config.seeds.size();
  std::vector<RunRow> rows(jobs);
  parallel_for(jobs, config.threads, [&](std::size_t job) {
    const std::size_t s = job / blocks.size();
    const auto& block = blocks[job % blocks.size()];
    const auto seed = config.seeds[s];
    LayerBundles bundles = agents_for(agents, s);
    const SpaceBase base = config.space_for(block);
    ClusteringEnvironment env(block, std::nullopt, minpts_scale(base));
    const auto result = search(env, base, bundles, config.budget, SearchMode::kTest, seed, block.block_index);
    rows[job] = evaluate(block, seed, Mode::kPretrainTest, result, SearchMode::kTest);
  });
  RunReport report;
  report.rows = std::move(rows);
  return report;
}

RunReport run_maintain_test(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                            const ModeConfig& config) {
  config.validate();
  check_agents(agents, config);
  for (const auto& b : blocks) require_labels(b);
  const auto maintain = with_episodes(config.budget, config.search_episodes, false);
  return by_seed(config, [&](std::size_t s) {
    const auto seed = config.seeds[s];
    LayerBundles bundles = agents_for(agents, s);
    std::vector<RunRow> rows;
    for (const auto& block : blocks) {
      const SpaceBase base = config.space_for(block);
      {
        ClusteringEnvironment env(block, std::nullopt, minpts_scale(base));
        const auto result = search(env, base, bundles, config.budget, SearchMode::kTest, seed, block.block_index);
        rows.push_back(evaluate(block, seed, Mode::kMaintainTest, result, SearchMode::kTest));
      }
      ClusteringEnvironment env(block, partial_for(block, config, seed), minpts_scale(base));
      search(env, base, bundles, maintain, SearchMode::kTrain, seed, block.block_index);
    }
    return rows;
  });
}

RunReport run_mode(const std::vector<DataBlock>& blocks, const std::vector<LayerBundles>& agents,
                   const ModeConfig& config) {
  switch (config.mode) {
    case Mode::kRetrain: return run_retrain(blocks, config);
    case Mode::kContinue: return run_continue(blocks, agents, config);
    case Mode::kPretrainTest: return run_pretrain_test(blocks, agents, config);
    case Mode::kMaintainTest: return run_maintain_test(blocks, agents, config);
  }
  throw ConfigError("mode", "unknown mode");
}

RunReport run_random_baseline(const std::vector<DataBlock>& blocks, const ModeConfig& config,
                              std::int64_t budget_rounds) {
  config.validate();
  for (const auto& b : blocks) require_labels(b);
  const std::size_t jobs = blocks.size() * config.seeds.size();
  std::vector<RunRow> rows(jobs);
  parallel_for(jobs, config.threads, [&](std::size_t job) {
    const std::size_t s = job / blocks.size();
    const auto& block = blocks[job % blocks.size()];
    const auto seed = config.seeds[s];
    const SpaceBase base = config.space_for(block);
    const auto result = random_search(block, partial_for(block, config, seed), budget_rounds, base,
                                      config.budget.max_layers,
                                      derive_seed(seed, block.block_index, 0, StreamPurpose::kBaseline));
    RunRow row;
    row.block = block.block_index;
    row.seed = seed;
    row.mode = "random";
    row.params = result.best_params;
    row.rounds = result.rounds_consumed;
    row.reward = result.best_reward;
    row.reward_queries = result.rounds_consumed;
    const auto outcome = cluster(block, row.params);
    row.nmi = nmi(*block.labels, outcome.assignment);
    row.ari = ari(*block.labels, outcome.assignment);
    std::vector<CurvePoint> curve;
    for (std::size_t i = 0; i < result.best_so_far.size(); ++i) {
      curve.push_back({static_cast<std::int64_t>(i + 1), result.best_so_far[i]});
    }
    row.curve = evaluate_curve(block, curve);
    rows[job] = std::move(row);
  });
  RunReport report;
  report.rows = std::move(rows);
  return report;
}

}  // namespace drld
