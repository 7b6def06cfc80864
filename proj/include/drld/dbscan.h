#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "drld/data.h"

namespace drld {

inline constexpr int kNoise = -1;

// One point of the search space.
struct ParamCombo {
  double eps = 0.0;
  int minpts = 1;

  friend bool operator==(const ParamCombo&, const ParamCombo&) = default;
};

struct ClusterSummary {
  Eigen::VectorXd center_feature;  // member nearest the cluster mean
  double center_distance = 0.0;    // to the block's center object
  int size = 0;
};

struct ClusterOutcome {
  std::vector<int> assignment;  // cluster id in [0, k) or kNoise
  std::vector<ClusterSummary> clusters;
  int k = 0;

  int noise_count() const;
};

// Deterministic DBSCAN. The eps-neighbourhood includes the point itself and
// uses dist <= eps. Clusters are seeded from core points in index order and
// expanded breadth-first, so a border point reachable from several clusters
// belongs to the first one discovered.
ClusterOutcome cluster(const DataBlock& block, const ParamCombo& params);

// Core flags: |N_eps(i)| >= minpts, the neighbourhood counting i itself.
std::vector<char> core_points(const DataBlock& block, const ParamCombo& params);

// Fills `clusters` from a raw assignment (ids must be contiguous 0..k-1).
ClusterOutcome summarize(const DataBlock& block, std::vector<int> assignment);

// Writes "index,cluster" rows; noise is -1.
void write_assignment_csv(const ClusterOutcome& outcome, const std::string& path);

// Memoizes clustering results per parameter combination for one block.
class ResultCache {
 public:
  struct Key {
    std::int64_t eps_q;
    int minpts;
    friend bool operator==(const Key&, const Key&) = default;
  };

  static Key key_for(const ParamCombo& params);

  std::shared_ptr<const ClusterOutcome> find(const ParamCombo& params) const;
  void insert(const ParamCombo& params, std::shared_ptr<const ClusterOutcome> outcome);

  std::int64_t hits() const { return hits_; }
  std::int64_t misses() const { return misses_; }
  std::size_t size() const { return entries_.size(); }

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<std::int64_t>{}(k.eps_q) * 1000003u ^ std::hash<int>{}(k.minpts);
    }
  };

  friend std::shared_ptr<const ClusterOutcome> cached_cluster(ResultCache&, const DataBlock&,
                                                              const ParamCombo&);

  std::unordered_map<Key, std::shared_ptr<const ClusterOutcome>, KeyHash> entries_;
  std::int64_t hits_ = 0;
  std::int64_t misses_ = 0;
};

// Returns the cached outcome or clusters, stores and returns. The key rounds
// eps to 12 decimal digits.
std::shared_ptr<const ClusterOutcome> cached_cluster(ResultCache& cache, const DataBlock& block,
                                                     const ParamCombo& params);

}  // namespace drld
