#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "drld/checkpoint.h"
#include "drld/config.h"
#include "drld/error.h"
#include "drld/gradcheck.h"
#include "drld/modes.h"
#include "drld/report.h"

namespace fs = std::filesystem;
using namespace drld;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

struct Overrides {
  std::string config_path;
  std::vector<std::string> datasets;
  std::optional<std::string> mode;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> output_dir;
  std::optional<std::string> checkpoint_dir;
  std::optional<int> episodes, pretrain_episodes, steps, layers, pi_eps, pi_minpts, blocks, pretrain_blocks, threads;
  std::optional<double> delta, label_proportion, minpts_factor;
  std::optional<std::int64_t> baseline_rounds;
  bool no_labels = false;
  bool skip_header = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("-d,--data", datasets, "Dataset file(s); label in the last column");
    cmd->add_option("--mode", mode, "retrain | continue | pretrain_test | maintain_test");
    cmd->add_option("--seeds", seeds, "Seeds")->delimiter(',');
    cmd->add_option("-o,--output", output_dir, "Output directory");
    cmd->add_option("--checkpoints", checkpoint_dir, "Checkpoint directory");
    cmd->add_option("--episodes", episodes, "Episodes per layer");
    cmd->add_option("--pretrain-episodes", pretrain_episodes, "Episodes per layer while pretraining");
    cmd->add_option("--steps", steps, "Steps per episode");
    cmd->add_option("--layers", layers, "Recursion layers");
    cmd->add_option("--pi-eps", pi_eps, "Eps points per layer");
    cmd->add_option("--pi-minpts", pi_minpts, "MinPts points per layer");
    cmd->add_option("--blocks", blocks, "Stream blocks");
    cmd->add_option("--pretrain-blocks", pretrain_blocks, "Leading blocks used for pretraining");
    cmd->add_option("--delta", delta, "End-point reward weight");
    cmd->add_option("--label-proportion", label_proportion, "Share of labelled rows used as reward");
    cmd->add_option("--minpts-factor", minpts_factor, "MinPts upper bound as a fraction of rows");
    cmd->add_option("--rounds", baseline_rounds, "Random-search budget in clustering rounds");
    cmd->add_option("--threads", threads, "Worker threads");
    cmd->add_flag("--no-labels", no_labels, "Data files have no label column");
    cmd->add_flag("--skip-header", skip_header, "Skip the first line of each data file");
  }

  RunConfig resolve(RunConfig c) const {
    if (!config_path.empty()) c = load_config(config_path, c);
    if (!datasets.empty()) c.datasets = datasets;
    if (mode) c.mode.mode = parse_mode(*mode);
    if (!seeds.empty()) c.mode.seeds = seeds;
    if (output_dir) c.output_dir = *output_dir;
    if (checkpoint_dir) c.checkpoint_dir = *checkpoint_dir;
    if (episodes) c.mode.search_episodes = c.mode.budget.max_episodes = *episodes;
    if (pretrain_episodes) c.mode.pretrain_episodes = *pretrain_episodes;
    if (steps) c.mode.budget.max_steps = *steps;
    if (layers) c.mode.budget.max_layers = *layers;
    if (pi_eps) c.mode.pi_eps = *pi_eps;
    if (pi_minpts) c.mode.pi_minpts = *pi_minpts;
    if (blocks) c.num_blocks = *blocks;
    if (pretrain_blocks) c.pretrain_blocks = *pretrain_blocks;
    if (delta) c.mode.budget.delta = *delta;
    if (label_proportion) c.mode.label_proportion = *label_proportion;
    if (minpts_factor) c.mode.minpts_factor = *minpts_factor;
    if (baseline_rounds) c.baseline_rounds = *baseline_rounds;
    if (no_labels) c.has_labels = false;
    if (skip_header) c.skip_header = true;

    int workers = threads ? *threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* cap = std::getenv("DRLD_THREADS")) {
      const int limit = std::atoi(cap);
      if (limit >= 1) workers = std::min(workers, limit);
    }
    c.mode.threads = workers;
    if (c.datasets.empty()) throw ConfigError("datasets", "no dataset given");
    c.validate();
    return c;
  }
};

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

RawDataset load(const RunConfig& c, const std::string& path) {
  if (!fs::exists(path)) throw DataError("dataset not found: " + path);
  return load_csv(path, {c.has_labels, c.skip_header});
}

void emit(const RunConfig& c, RunReport report, const std::string& name) {
  report.dataset = name;
  const fs::path out(c.output_dir);
  write_text((out / (name + "_report.json")).string(), report_json(report));
  write_text((out / (name + "_report.csv")).string(), report_csv(report));
  write_text((out / (name + "_curve.csv")).string(), curve_csv(report));
  for (const auto& a : report.aggregates()) {
    std::printf("%s block %d %s: NMI %.3f +- %.3f  ARI %.3f +- %.3f  rounds %.1f\n", name.c_str(), a.block,
                a.mode.c_str(), a.nmi_mean, a.nmi_std, a.ari_mean, a.ari_std, a.rounds_mean);
  }
}

std::string checkpoint_root(const RunConfig& c) {
  return c.checkpoint_dir.empty() ? (fs::path(c.output_dir) / "checkpoints").string() : c.checkpoint_dir;
}

std::string seed_dir(const std::string& root, std::uint64_t seed) {
  return (fs::path(root) / ("seed_" + std::to_string(seed))).string();
}

std::vector<LayerBundles> load_agents(const RunConfig& c) {
  std::vector<LayerBundles> agents;
  const auto root = checkpoint_root(c);
  for (const auto seed : c.mode.seeds) agents.push_back(load_layer_checkpoints(seed_dir(root, seed), c.mode.budget.max_layers));
  return agents;
}

int cmd_offline(const RunConfig& c) {
  for (const auto& path : c.datasets) {
    const std::vector<DataBlock> blocks{normalize(load(c, path))};
    std::vector<LayerBundles> agents;
    if (c.mode.mode != Mode::kRetrain) agents = load_agents(c);
    emit(c, run_mode(blocks, agents, c.mode), stem(path));
  }
  return kExitOk;
}

int cmd_online(const RunConfig& c) {
  for (const auto& path : c.datasets) {
    const auto blocks = partition_stream(load(c, path), c.num_blocks);
    const std::vector<DataBlock> head(blocks.begin(), blocks.begin() + c.pretrain_blocks);
    const std::vector<DataBlock> tail(blocks.begin() + c.pretrain_blocks, blocks.end());

    std::vector<LayerBundles> agents;
    if (c.mode.mode != Mode::kRetrain) {
      const auto root = checkpoint_root(c);
      if (!c.checkpoint_dir.empty() && fs::exists(seed_dir(root, c.mode.seeds.front()))) {
        agents = load_agents(c);
      } else {
        agents.resize(c.mode.seeds.size());
        parallel_for(c.mode.seeds.size(), c.mode.threads, [&](std::size_t s) {
          agents[s] = run_pretrain(head, c.mode, c.mode.seeds[s]);
          save_layer_checkpoints(agents[s], seed_dir(root, c.mode.seeds[s]));
        });
      }
    }
    emit(c, run_mode(tail, agents, c.mode), stem(path));
  }
  return kExitOk;
}

int cmd_baseline(const RunConfig& c) {
  for (const auto& path : c.datasets) {
    const std::vector<DataBlock> blocks{normalize(load(c, path))};
    emit(c, run_random_baseline(blocks, c.mode, c.baseline_rounds), stem(path) + "_random");
  }
  return kExitOk;
}

int cmd_gradcheck(const GradcheckOptions& o) {
  const auto report = run_gradcheck(o);
  for (const auto& s : report.suites) {
    std::printf("%-8s %s  max rel error %.3e at %s  (%lld probes, %lld skipped at kinks)\n", s.name.c_str(),
                s.passed() ? "PASS" : "FAIL", s.max_rel_error, s.worst.c_str(), static_cast<long long>(s.probes),
                static_cast<long long>(s.skipped));
  }
  return report.passed() ? kExitOk : kExitCheck;
}

int cmd_curves(const std::string& report_path, const std::string& output) {
  const auto report = report_from_json(read_text(report_path));
  const auto csv = curve_csv(report);
  if (output.empty()) {
    std::cout << csv;
  } else {
    write_text(output, csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automatic DBSCAN parameter search with recursive reinforcement learning"};
  app.require_subcommand(1);

  Overrides offline_opts, online_opts, baseline_opts;
  auto* offline = app.add_subcommand("offline", "Search parameters for whole datasets");
  offline_opts.attach(offline);
  auto* online = app.add_subcommand("online", "Pretrain on leading blocks of a stream, then evaluate the rest");
  online_opts.attach(online);
  auto* baseline = app.add_subcommand("baseline", "Random search at a fixed round budget");
  baseline_opts.attach(baseline);

  GradcheckOptions grad;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--batches", grad.batches, "Random batches");
  gradcheck->add_option("--probes", grad.probes_per_tensor, "Coordinates probed per tensor");
  gradcheck->add_option("--seed", grad.seed, "Seed");

  std::string report_path, curve_out;
  auto* curves = app.add_subcommand("curves", "Write the per-round curve CSV of a saved report");
  curves->add_option("report", report_path, "Report JSON")->required()->check(CLI::ExistingFile);
  curves->add_option("-o,--output", curve_out, "Output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*offline) return cmd_offline(offline_opts.resolve(RunConfig::offline_defaults()));
    if (*online) return cmd_online(online_opts.resolve(RunConfig::online_defaults()));
    if (*baseline) return cmd_baseline(baseline_opts.resolve(RunConfig::offline_defaults()));
    if (*gradcheck) return cmd_gradcheck(grad);
    if (*curves) return cmd_curves(report_path, curve_out);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
