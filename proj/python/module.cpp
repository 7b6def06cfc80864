#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "drld/dbscan.h"
#include "drld/error.h"
#include "drld/gradcheck.h"
#include "drld/metrics.h"
#include "drld/modes.h"

namespace py = pybind11;
using namespace drld;

namespace {

RawDataset raw_of(const RowMatrix& x, const std::optional<Labels>& labels) {
  if (labels && static_cast<Eigen::Index>(labels->size()) != x.rows()) {
    throw DataError("labels have " + std::to_string(labels->size()) + " entries for " + std::to_string(x.rows()) +
                    " rows");
  }
  RawDataset raw;
  raw.features = x;
  raw.labels = labels;
  return raw;
}

py::dict row_dict(const RunRow& r) {
  py::dict d;
  d["block"] = r.block;
  d["seed"] = r.seed;
  d["mode"] = r.mode;
  d["nmi"] = r.nmi;
  d["ari"] = r.ari;
  d["eps"] = r.params.eps;
  d["minpts"] = r.params.minpts;
  d["rounds"] = r.rounds;
  d["reward"] = r.reward;
  d["reward_queries"] = r.reward_queries;
  py::list curve;
  for (const auto& c : r.curve) curve.append(py::make_tuple(c.round, c.best_nmi));
  d["curve"] = curve;
  return d;
}

py::list rows_of(const RunReport& report) {
  py::list out;
  for (const auto& r : report.rows) out.append(row_dict(r));
  return out;
}

ModeConfig mode_config(std::vector<std::uint64_t> seeds, int episodes, int steps, int layers, double label_proportion,
                       double minpts_factor, int hidden, int threads) {
  ModeConfig c;
  c.seeds = std::move(seeds);
  c.search_episodes = c.budget.max_episodes = episodes;
  c.budget.max_steps = steps;
  c.budget.max_layers = layers;
  c.label_proportion = label_proportion;
  c.minpts_factor = minpts_factor;
  c.agent.hidden = hidden;
  c.threads = threads;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_drld, m) {
  m.doc() = "DBSCAN parameter search driven by a recursive actor-critic agent";

  // translators run newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<LabelAccessError>(m, "LabelAccessError", PyExc_RuntimeError);

  m.def(
      "normalize", [](const RowMatrix& x) { return normalize(raw_of(x, std::nullopt)).features; }, py::arg("x"),
      "Per-column min-max scaling to [0, 1].");

  m.def(
      "dbscan",
      [](const RowMatrix& x, double eps, int minpts, bool scale) {
        DataBlock block = normalize(raw_of(x, std::nullopt));
        if (!scale) block.features = x;
        return cluster(block, {eps, minpts}).assignment;
      },
      py::arg("x"), py::arg("eps"), py::arg("minpts"), py::arg("normalize") = true,
      "Cluster ids per row (-1 for noise). Rows are min-max scaled first unless normalize=False.");

  m.def("nmi", [](const Labels& t, const Labels& p) { return nmi(t, p); }, py::arg("truth"), py::arg("pred"));
  m.def("ari", [](const Labels& t, const Labels& p) { return ari(t, p); }, py::arg("truth"), py::arg("pred"));

  m.def(
      "search",
      [](const RowMatrix& x, const Labels& labels, std::vector<std::uint64_t> seeds, int episodes, int steps,
         int layers, double label_proportion, double minpts_factor, int hidden, int threads) {
        const auto c = mode_config(std::move(seeds), episodes, steps, layers, label_proportion, minpts_factor,
                                   hidden, threads);
        const std::vector<DataBlock> blocks{normalize(raw_of(x, labels))};
        RunReport report;
        {
          py::gil_scoped_release release;
          report = run_retrain(blocks, c);
        }
        return rows_of(report);
      },
      py::arg("x"), py::arg("labels"), py::arg("seeds") = std::vector<std::uint64_t>{0}, py::arg("episodes") = 15,
      py::arg("steps") = 30, py::arg("layers") = 3, py::arg("label_proportion") = 0.2,
      py::arg("minpts_factor") = 0.25, py::arg("hidden") = 256, py::arg("threads") = 1,
      "Training-based search on one dataset (retrain mode); one result dict per seed.");

  m.def(
      "random_search",
      [](const RowMatrix& x, const Labels& labels, std::int64_t rounds, std::vector<std::uint64_t> seeds, int layers,
         double label_proportion, double minpts_factor) {
        const auto c = mode_config(std::move(seeds), 15, 30, layers, label_proportion, minpts_factor, 256, 1);
        const std::vector<DataBlock> blocks{normalize(raw_of(x, labels))};
        RunReport report;
        {
          py::gil_scoped_release release;
          report = run_random_baseline(blocks, c, rounds);
        }
        return rows_of(report);
      },
      py::arg("x"), py::arg("labels"), py::arg("rounds") = 30, py::arg("seeds") = std::vector<std::uint64_t>{0},
      py::arg("layers") = 3, py::arg("label_proportion") = 0.2, py::arg("minpts_factor") = 0.25);

  m.def(
      "synthetic_stream",
      [](int blocks, int rows_per_block, int clusters, int dims, double drift, std::uint64_t seed) {
        SyntheticStreamSpec spec;
        spec.num_blocks = blocks;
        spec.rows_per_block = rows_per_block;
        spec.clusters = clusters;
        spec.dims = dims;
        spec.drift = drift;
        spec.seed = seed;
        const auto raw = synthetic_stream(spec);
        return py::make_tuple(RowMatrix(raw.features), *raw.labels);
      },
      py::arg("blocks") = 16, py::arg("rows_per_block") = 400, py::arg("clusters") = 4, py::arg("dims") = 2,
      py::arg("drift") = 0.15, py::arg("seed") = 7, "Drifting Gaussian clusters; returns (features, labels).");

  m.def(
      "online",
      [](const RowMatrix& x, const Labels& labels, const std::string& mode, int blocks, int pretrain_blocks,
         std::vector<std::uint64_t> seeds, int pretrain_episodes, int episodes, int steps, int layers,
         double minpts_factor, int hidden, int threads) {
        auto c = mode_config(std::move(seeds), episodes, steps, layers, 0.2, minpts_factor, hidden, threads);
        c.mode = parse_mode(mode);
        c.pretrain_episodes = pretrain_episodes;
        c.validate();
        if (pretrain_blocks < 1 || pretrain_blocks >= blocks) {
          throw ConfigError("pretrain_blocks", "must be at least 1 and below blocks");
        }
        const auto all = partition_stream(raw_of(x, labels), blocks);
        const std::vector<DataBlock> head(all.begin(), all.begin() + pretrain_blocks);
        const std::vector<DataBlock> tail(all.begin() + pretrain_blocks, all.end());
        RunReport report;
        {
          py::gil_scoped_release release;
          std::vector<LayerBundles> agents;
          if (c.mode != Mode::kRetrain) {
            agents.resize(c.seeds.size());
            parallel_for(c.seeds.size(), c.threads, [&](std::size_t s) { agents[s] = run_pretrain(head, c, c.seeds[s]); });
          }
          report = run_mode(tail, agents, c);
        }
        return rows_of(report);
      },
      py::arg("x"), py::arg("labels"), py::arg("mode") = "maintain_test", py::arg("blocks") = 16,
      py::arg("pretrain_blocks") = 8, py::arg("seeds") = std::vector<std::uint64_t>{0},
      py::arg("pretrain_episodes") = 50, py::arg("episodes") = 15, py::arg("steps") = 30, py::arg("layers") = 6,
      py::arg("minpts_factor") = 0.0025, py::arg("hidden") = 256, py::arg("threads") = 1,
      "Pretrain on the leading blocks of a stream, then run `mode` on the rest.");

  m.def(
      "gradcheck",
      [](int batches, std::uint64_t seed) {
        GradcheckOptions o;
        o.batches = batches;
        o.seed = seed;
        const auto report = run_gradcheck(o);
        py::dict out;
        for (const auto& s : report.suites) out[py::str(s.name)] = s.max_rel_error;
        return py::make_tuple(report.passed(), out);
      },
      py::arg("batches") = 20, py::arg("seed") = 2024,
      "Finite-difference checks; returns (passed, {suite: max relative error}).");
}
