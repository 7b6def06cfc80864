#include "drld/config.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drld/error.h"

namespace drld {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

}  // namespace

RunConfig RunConfig::offline_defaults() {
  RunConfig c;
  c.mode.mode = Mode::kRetrain;
  c.mode.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  c.mode.budget.max_layers = 3;
  c.mode.minpts_factor = 0.25;
  return c;
}

RunConfig RunConfig::online_defaults() {
  RunConfig c;
  c.mode.mode = Mode::kMaintainTest;
  c.mode.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  c.mode.budget.max_layers = 6;
  c.mode.minpts_factor = 0.0025;
  return c;
}

void RunConfig::validate() const {
  mode.validate();
  if (num_blocks < 1) throw ConfigError("blocks", "must be at least 1");
  if (pretrain_blocks < 1 || pretrain_blocks >= num_blocks) {
    throw ConfigError("pretrain_blocks", "must be at least 1 and below blocks");
  }
  if (baseline_rounds < 1) throw ConfigError("baseline_rounds", "must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

RunConfig config_from_json(const std::string& json_text, RunConfig c) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");

  static const std::vector<std::string> known = {
      "datasets", "has_labels", "skip_header", "output_dir", "checkpoint_dir", "blocks", "pretrain_blocks",
      "baseline_rounds", "mode", "seeds", "max_episodes", "pretrain_episodes", "max_steps", "max_layers",
      "episode_patience", "layer_patience", "early_stop", "pi_eps", "pi_minpts", "delta", "label_proportion",
      "minpts_factor", "carry_buffer", "threads", "gamma", "tau", "learning_rate", "momentum", "batch_size",
      "hidden", "encoder_training"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown field");
  }

  if (j.contains("datasets") && j["datasets"].is_string()) {
    c.datasets = {j["datasets"].get<std::string>()};
  } else {
    read(j, "datasets", c.datasets);
  }
  read(j, "has_labels", c.has_labels);
  read(j, "skip_header", c.skip_header);
  read(j, "output_dir", c.output_dir);
  read(j, "checkpoint_dir", c.checkpoint_dir);
  read(j, "blocks", c.num_blocks);
  read(j, "pretrain_blocks", c.pretrain_blocks);
  read(j, "baseline_rounds", c.baseline_rounds);
  if (j.contains("mode")) {
    std::string m;
    read(j, "mode", m);
    c.mode.mode = parse_mode(m);
  }
  read(j, "seeds", c.mode.seeds);
  read(j, "max_episodes", c.mode.search_episodes);
  read(j, "pretrain_episodes", c.mode.pretrain_episodes);
  read(j, "max_steps", c.mode.budget.max_steps);
  read(j, "max_layers", c.mode.budget.max_layers);
  read(j, "episode_patience", c.mode.budget.episode_patience);
  read(j, "layer_patience", c.mode.budget.layer_patience);
  read(j, "early_stop", c.mode.budget.early_stop);
  read(j, "pi_eps", c.mode.pi_eps);
  read(j, "pi_minpts", c.mode.pi_minpts);
  read(j, "delta", c.mode.budget.delta);
  read(j, "label_proportion", c.mode.label_proportion);
  read(j, "minpts_factor", c.mode.minpts_factor);
  read(j, "carry_buffer", c.mode.carry_buffer);
  read(j, "threads", c.mode.threads);
  read(j, "gamma", c.mode.agent.gamma);
  read(j, "tau", c.mode.agent.tau);
  read(j, "learning_rate", c.mode.agent.learning_rate);
  read(j, "momentum", c.mode.agent.momentum);
  read(j, "batch_size", c.mode.agent.batch_size);
  read(j, "hidden", c.mode.agent.hidden);
  if (j.contains("encoder_training")) {
    std::string e;
    read(j, "encoder_training", e);
    if (e == "joint") {
      c.mode.agent.encoder_training = EncoderTraining::kJoint;
    } else if (e == "actor_only") {
      c.mode.agent.encoder_training = EncoderTraining::kActorOnly;
    } else {
      throw ConfigError("encoder_training", "must be 'joint' or 'actor_only'");
    }
  }
  c.mode.budget.max_episodes = c.mode.search_episodes;
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), std::move(base));
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["datasets"] = c.datasets;
  j["has_labels"] = c.has_labels;
  j["skip_header"] = c.skip_header;
  j["output_dir"] = c.output_dir;
  j["checkpoint_dir"] = c.checkpoint_dir;
  j["blocks"] = c.num_blocks;
  j["pretrain_blocks"] = c.pretrain_blocks;
  j["baseline_rounds"] = c.baseline_rounds;
  j["mode"] = std::string(mode_name(c.mode.mode));
  j["seeds"] = c.mode.seeds;
  j["max_episodes"] = c.mode.search_episodes;
  j["pretrain_episodes"] = c.mode.pretrain_episodes;
  j["max_steps"] = c.mode.budget.max_steps;
  j["max_layers"] = c.mode.budget.max_layers;
  j["episode_patience"] = c.mode.budget.episode_patience;
  j["layer_patience"] = c.mode.budget.layer_patience;
  j["early_stop"] = c.mode.budget.early_stop;
  j["pi_eps"] = c.mode.pi_eps;
  j["pi_minpts"] = c.mode.pi_minpts;
  j["delta"] = c.mode.budget.delta;
  j["label_proportion"] = c.mode.label_proportion;
  j["minpts_factor"] = c.mode.minpts_factor;
  j["carry_buffer"] = c.mode.carry_buffer;
  j["threads"] = c.mode.threads;
  j["gamma"] = c.mode.agent.gamma;
  j["tau"] = c.mode.agent.tau;
  j["learning_rate"] = c.mode.agent.learning_rate;
  j["momentum"] = c.mode.agent.momentum;
  j["batch_size"] = c.mode.agent.batch_size;
  j["hidden"] = c.mode.agent.hidden;
  j["encoder_training"] = c.mode.agent.encoder_training == EncoderTraining::kJoint ? "joint" : "actor_only";
  return j.dump(2);
}

}  // namespace drld
