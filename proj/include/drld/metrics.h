#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drld/data.h"
#include "drld/dbscan.h"

namespace drld {

// Counts of (true class, predicted cluster) pairs. Labels are remapped to
// dense ids; noise (-1) in the prediction is an ordinary label, so all noise
// points share one cluster.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;  // rows: classes, cols: clusters
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t total = 0;

  static ContingencyTable build(std::span<const int> truth, std::span<const int> pred);
};

// 2 I(T;P) / (H(T) + H(P)), natural logs. Both entropies zero gives 1; exactly
// one zero gives 0.
double nmi(std::span<const int> truth, std::span<const int> pred);

// Permutation-model adjusted Rand index.
double ari(std::span<const int> truth, std::span<const int> pred);

// NMI over the labelled rows only.
double reward_nmi(const ClusterOutcome& outcome, const PartialLabels& partial);

}  // namespace drld
