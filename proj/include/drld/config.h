#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drld/modes.h"

namespace drld {

struct RunConfig {
  std::vector<std::string> datasets;
  bool has_labels = true;
  bool skip_header = false;
  std::string output_dir = "drld_out";
  std::string checkpoint_dir;  // empty: <output_dir>/checkpoints
  int num_blocks = 16;         // streaming split
  int pretrain_blocks = 8;
  std::int64_t baseline_rounds = 30;
  ModeConfig mode;

  // Offline defaults: L_max 3, MinPts bound 0.25 n, ten seeds.
  static RunConfig offline_defaults();
  // Streaming defaults: L_max 6, MinPts bound 0.0025 n, maintain-test.
  static RunConfig online_defaults();

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Overlays the keys present in a JSON document onto `base`. Unknown keys and
// wrongly typed values raise ConfigError.
RunConfig config_from_json(const std::string& json_text, RunConfig base);
RunConfig load_config(const std::string& path, RunConfig base);
std::string config_to_json(const RunConfig& config);

}  // namespace drld
