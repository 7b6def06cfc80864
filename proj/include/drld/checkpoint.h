#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drld/agent.h"

namespace drld {

// Container layout (little-endian):
//   "DRLD" | u32 version | u32 tensor count |
//   per tensor: u32 name length, name bytes, u32 rank, u64 dims[rank],
//               f64 values (row-major) |
//   u32 CRC32 of everything before it
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;
};

std::string encode_tensors(const std::vector<NamedTensor>& tensors);
// Throws ChecksumError on CRC mismatch, DataError on a malformed container.
std::vector<NamedTensor> decode_tensors(std::string_view bytes);

void save_checkpoint(const AgentBundle& bundle, const std::string& path, bool include_buffer = false);
AgentBundle load_checkpoint(const std::string& path);

// One file per recursion layer: <dir>/layer_<l>.drld
void save_layer_checkpoints(const std::vector<AgentBundle>& bundles, const std::string& dir,
                            bool include_buffer = false);
std::vector<AgentBundle> load_layer_checkpoints(const std::string& dir, int layers);

}  // namespace drld
