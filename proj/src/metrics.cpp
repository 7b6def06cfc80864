#include "drld/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "drld/error.h"

namespace drld {

namespace {

std::vector<int> dense_ids(std::span<const int> labels, int& count) {
  std::map<int, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const int v : labels) {
    const auto [it, inserted] = ids.try_emplace(v, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  count = static_cast<int>(ids.size());
  return out;
}

double entropy(const std::vector<std::int64_t>& sums, double total) {
  double h = 0.0;
  for (const auto c : sums) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

// Every class maps onto exactly one cluster and vice versa.
bool same_partition(const ContingencyTable& t) {
  if (t.row_sums.size() != t.col_sums.size()) return false;
  for (const auto& row : t.counts) {
    if (std::count_if(row.begin(), row.end(), [](std::int64_t v) { return v != 0; }) != 1) return false;
  }
  return true;
}

double choose2(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

ContingencyTable ContingencyTable::build(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) {
    throw DataError("label vectors differ in length: " + std::to_string(truth.size()) + " vs " +
                    std::to_string(pred.size()));
  }
  if (truth.empty()) throw DataError("cannot score an empty labelling");
  int n_classes = 0, n_clusters = 0;
  const auto t = dense_ids(truth, n_classes);
  const auto p = dense_ids(pred, n_clusters);

  ContingencyTable table;
  table.counts.assign(static_cast<std::size_t>(n_classes),
                      std::vector<std::int64_t>(static_cast<std::size_t>(n_clusters), 0));
  table.row_sums.assign(static_cast<std::size_t>(n_classes), 0);
  table.col_sums.assign(static_cast<std::size_t>(n_clusters), 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto r = static_cast<std::size_t>(t[i]);
    const auto c = static_cast<std::size_t>(p[i]);
    ++table.counts[r][c];
    ++table.row_sums[r];
    ++table.col_sums[c];
  }
  table.total = static_cast<std::int64_t>(t.size());
  return table;
}

double nmi(std::span<const int> truth, std::span<const int> pred) {
  const auto table = ContingencyTable::build(truth, pred);
  const double n = static_cast<double>(table.total);
  const double h_true = entropy(table.row_sums, n);
  const double h_pred = entropy(table.col_sums, n);
  if (h_true == 0.0 && h_pred == 0.0) return 1.0;
  if (h_true == 0.0 || h_pred == 0.0) return 0.0;
  if (same_partition(table)) return 1.0;  // exact, free of log rounding

  double mi = 0.0;
  for (std::size_t r = 0; r < table.counts.size(); ++r) {
    for (std::size_t c = 0; c < table.counts[r].size(); ++c) {
      const auto nij = table.counts[r][c];
      if (nij == 0) continue;
      const double pij = static_cast<double>(nij) / n;
      mi += pij * std::log(static_cast<double>(nij) * n /
                           (static_cast<double>(table.row_sums[r]) * static_cast<double>(table.col_sums[c])));
    }
  }
  const double value = 2.0 * mi / (h_true + h_pred);
  return std::clamp(value, 0.0, 1.0);
}

double ari(std::span<const int> truth, std::span<const int> pred) {
  const auto table = ContingencyTable::build(truth, pred);
  double index = 0.0;
  for (const auto& row : table.counts) {
    for (const auto nij : row) index += choose2(nij);
  }
  double sum_rows = 0.0, sum_cols = 0.0;
  for (const auto a : table.row_sums) sum_rows += choose2(a);
  for (const auto b : table.col_sums) sum_cols += choose2(b);
  const double pairs = choose2(table.total);
  if (pairs == 0.0) return 1.0;
  const double expected = sum_rows * sum_cols / pairs;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Zero denominator only when both partitions are all-singletons or both a
  // single cluster, i.e. identical.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double reward_nmi(const ClusterOutcome& outcome, const PartialLabels& partial) {
  if (partial.indices.empty()) throw DataError("partial label set is empty");
  std::vector<int> pred;
  pred.reserve(partial.indices.size());
  for (const auto idx : partial.indices) pred.push_back(outcome.assignment.at(static_cast<std::size_t>(idx)));
  return nmi(partial.values, pred);
}

}  // namespace drld
