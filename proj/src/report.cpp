#include "drld/report.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drld/error.h"

namespace drld {

using nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double number_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

std::string report_csv(const RunReport& report) {
  std::ostringstream out;
  out << "block,seed,mode,nmi,ari,eps,minpts,rounds\n";
  for (const auto& r : report.rows) {
    out << r.block << ',' << r.seed << ',' << r.mode << ',' << fmt("%.6f", r.nmi) << ',' << fmt("%.6f", r.ari) << ','
        << fmt("%.9g", r.params.eps) << ',' << r.params.minpts << ',' << r.rounds << '\n';
  }
  return out.str();
}

std::string curve_csv(const RunReport& report) {
  std::ostringstream out;
  out << "round,best_nmi,seed,method\n";
  for (const auto& r : report.rows) {
    for (const auto& c : r.curve) {
      out << c.round << ',' << fmt("%.6f", c.best_nmi) << ',' << r.seed << ',' << r.mode << '\n';
    }
  }
  return out.str();
}

std::string report_json(const RunReport& report) {
  json j;
  j["dataset"] = report.dataset;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["block"] = r.block;
    row["seed"] = r.seed;
    row["mode"] = r.mode;
    row["nmi"] = number_or_null(r.nmi);
    row["ari"] = number_or_null(r.ari);
    row["eps"] = r.params.eps;
    row["minpts"] = r.params.minpts;
    row["rounds"] = r.rounds;
    row["reward"] = r.reward ? json(*r.reward) : json(nullptr);
    row["reward_queries"] = r.reward_queries;
    json curve = json::array();
    for (const auto& c : r.curve) curve.push_back({c.round, number_or_null(c.best_nmi)});
    row["curve"] = std::move(curve);
    j["rows"].push_back(std::move(row));
  }
  j["aggregates"] = json::array();
  for (const auto& a : report.aggregates()) {
    j["aggregates"].push_back({{"block", a.block},
                               {"mode", a.mode},
                               {"runs", a.runs},
                               {"nmi_mean", number_or_null(a.nmi_mean)},
                               {"nmi_std", number_or_null(a.nmi_std)},
                               {"ari_mean", number_or_null(a.ari_mean)},
                               {"ari_std", number_or_null(a.ari_std)},
                               {"rounds_mean", number_or_null(a.rounds_mean)}});
  }
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  RunReport report;
  try {
    const json j = json::parse(text);
    report.dataset = j.value("dataset", "");
    for (const auto& row : j.at("rows")) {
      RunRow r;
      r.block = row.at("block").get<int>();
      r.seed = row.at("seed").get<std::uint64_t>();
      r.mode = row.at("mode").get<std::string>();
      r.nmi = number_from(row.at("nmi"));
      r.ari = number_from(row.at("ari"));
      r.params = {row.at("eps").get<double>(), row.at("minpts").get<int>()};
      r.rounds = row.at("rounds").get<std::int64_t>();
      if (row.contains("reward") && !row["reward"].is_null()) r.reward = row["reward"].get<double>();
      r.reward_queries = row.value("reward_queries", std::int64_t{0});
      if (row.contains("curve")) {
        for (const auto& c : row["curve"]) r.curve.push_back({c.at(0).get<std::int64_t>(), number_from(c.at(1))});
      }
      report.rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::string search_trace_json(const SearchResult& result) {
  json j;
  j["best"] = {{"eps", result.best_params.eps}, {"minpts", result.best_params.minpts}};
  j["end"] = {{"eps", result.end_params.eps}, {"minpts", result.end_params.minpts}};
  j["best_reward"] = result.best_reward ? json(*result.best_reward) : json(nullptr);
  j["rounds"] = result.rounds_consumed;
  j["layers"] = json::array();
  for (const auto& layer : result.layers) {
    json l;
    l["layer"] = layer.layer;
    l["eps_bounds"] = {layer.space.eps_b1, layer.space.eps_b2};
    l["minpts_bounds"] = {layer.space.minpts_b1, layer.space.minpts_b2};
    l["eps_step"] = layer.space.theta_eps;
    l["minpts_step"] = layer.space.theta_minpts;
    l["episodes"] = json::array();
    for (const auto& ep : layer.episodes) {
      json e;
      e["start"] = {ep.start.eps, ep.start.minpts};
      e["stop"] = std::string(stop_name(ep.stop_type));
      e["end"] = {ep.end_params.eps, ep.end_params.minpts};
      e["steps"] = json::array();
      for (const auto& s : ep.steps) {
        e["steps"].push_back({{"action", std::string(action_name(s.action))},
                              {"eps", s.params.eps},
                              {"minpts", s.params.minpts},
                              {"reward", s.immediate_reward}});
      }
      l["episodes"].push_back(std::move(e));
    }
    j["layers"].push_back(std::move(l));
  }
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void merge_reports(RunReport& into, const RunReport& extra) {
  into.rows.insert(into.rows.end(), extra.rows.begin(), extra.rows.end());
}

}  // namespace drld
