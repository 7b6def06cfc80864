#include "drld/dbscan.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

#include "drld/error.h"

namespace drld {

namespace {

constexpr Eigen::Index kGridThreshold = 2000;
constexpr Eigen::Index kGridMaxDims = 3;

// Range queries over a block. Above kGridThreshold rows (and for d <= 3) a
// uniform grid with cell width eps restricts candidates to adjacent cells.
class NeighborIndex {
 public:
  NeighborIndex(const RowMatrix& x, double eps) : x_(x), eps2_(eps * eps), eps_(eps) {
    use_grid_ = x.rows() > kGridThreshold && x.cols() <= kGridMaxDims;
    if (!use_grid_) return;
    for (Eigen::Index i = 0; i < x.rows(); ++i) cells_[cell_of(i)].push_back(i);
  }

  // Neighbours of p (including p), ascending.
  void query(Eigen::Index p, std::vector<Eigen::Index>& out) const {
    out.clear();
    if (!use_grid_) {
      for (Eigen::Index q = 0; q < x_.rows(); ++q) {
        if (within(p, q)) out.push_back(q);
      }
      return;
    }
    visit_adjacent(p, [&](Eigen::Index q) {
      if (within(p, q)) out.push_back(q);
      return true;
    });
    std::sort(out.begin(), out.end());
  }

  // True when |N(p)| >= minpts; stops counting early.
  bool is_core(Eigen::Index p, int minpts) const {
    Eigen::Index count = 0;
    if (!use_grid_) {
      for (Eigen::Index q = 0; q < x_.rows(); ++q) {
        if (within(p, q) && ++count >= minpts) return true;
      }
      return false;
    }
    bool core = false;
    visit_adjacent(p, [&](Eigen::Index q) {
      if (within(p, q) && ++count >= minpts) {
        core = true;
        return false;
      }
      return true;
    });
    return core;
  }

 private:
  using CellKey = std::array<std::int64_t, kGridMaxDims>;

  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept {
      std::size_t h = 1469598103934665603ull;
      for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
      return h;
    }
  };

  bool within(Eigen::Index p, Eigen::Index q) const {
    return (x_.row(p) - x_.row(q)).squaredNorm() <= eps2_;
  }

  CellKey cell_of(Eigen::Index i) const {
    CellKey key{};
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      key[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor(x_(i, j) / eps_));
    }
    return key;
  }

  template <typename Fn>
  void visit_adjacent(Eigen::Index p, Fn&& fn) const {
    const CellKey base = cell_of(p);
    const auto dims = static_cast<int>(x_.cols());
    int combos = 1;
    for (int j = 0; j < dims; ++j) combos *= 3;
    for (int c = 0; c < combos; ++c) {
      CellKey key = base;
      int rest = c;
      for (int j = 0; j < dims; ++j) {
        key[static_cast<std::size_t>(j)] += rest % 3 - 1;
        rest /= 3;
      }
      const auto it = cells_.find(key);
      if (it == cells_.end()) continue;
      for (const auto q : it->second) {
        if (!fn(q)) return;
      }
    }
  }

  const RowMatrix& x_;
  double eps2_;
  double eps_;
  bool use_grid_ = false;
  std::unordered_map<CellKey, std::vector<Eigen::Index>, CellHash> cells_;
};

}  // namespace

int ClusterOutcome::noise_count() const {
  return static_cast<int>(std::count(assignment.begin(), assignment.end(), kNoise));
}

std::vector<char> core_points(const DataBlock& block, const ParamCombo& params) {
  const NeighborIndex index(block.features, params.eps);
  std::vector<char> core(static_cast<std::size_t>(block.rows()));
  for (Eigen::Index i = 0; i < block.rows(); ++i) core[static_cast<std::size_t>(i)] = index.is_core(i, params.minpts);
  return core;
}

ClusterOutcome cluster(const DataBlock& block, const ParamCombo& params) {
  const Eigen::Index n = block.rows();
  const NeighborIndex index(block.features, params.eps);

  std::vector<char> core(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) core[static_cast<std::size_t>(i)] = index.is_core(i, params.minpts);

  std::vector<int> assignment(static_cast<std::size_t>(n), kNoise);
  std::vector<Eigen::Index> neighbors;
  std::deque<Eigen::Index> frontier;
  int next_id = 0;
  for (Eigen::Index seed = 0; seed < n; ++seed) {
    const auto s = static_cast<std::size_t>(seed);
    if (!core[s] || assignment[s] != kNoise) continue;
    const int id = next_id++;
    assignment[s] = id;
    frontier.push_back(seed);
    while (!frontier.empty()) {
      const Eigen::Index p = frontier.front();
      frontier.pop_front();
      index.query(p, neighbors);
      for (const auto q : neighbors) {
        const auto qi = static_cast<std::size_t>(q);
        if (assignment[qi] != kNoise) continue;
        assignment[qi] = id;
        if (core[qi]) frontier.push_back(q);
      }
    }
  }
  return summarize(block, std::move(assignment));
}

ClusterOutcome summarize(const DataBlock& block, std::vector<int> assignment) {
  ClusterOutcome outcome;
  int k = 0;
  for (const int a : assignment) k = std::max(k, a + 1);
  outcome.k = k;
  outcome.clusters.resize(static_cast<std::size_t>(k));

  const Eigen::Index d = block.dims();
  std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(d));
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    const int a = assignment[static_cast<std::size_t>(i)];
    if (a == kNoise) continue;
    sums[static_cast<std::size_t>(a)] += block.features.row(i).transpose();
    ++outcome.clusters[static_cast<std::size_t>(a)].size;
  }

  for (std::size_t c = 0; c < sums.size(); ++c) sums[c] /= outcome.clusters[c].size;

  std::vector<double> best(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  std::vector<Eigen::Index> center(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    const int a = assignment[static_cast<std::size_t>(i)];
    if (a == kNoise) continue;
    const auto c = static_cast<std::size_t>(a);
    const double dist = (block.features.row(i).transpose() - sums[c]).squaredNorm();
    if (dist < best[c]) {
      best[c] = dist;
      center[c] = i;
    }
  }

  const Eigen::RowVectorXd block_center = block.center_object();
  for (std::size_t c = 0; c < outcome.clusters.size(); ++c) {
    auto& summary = outcome.clusters[c];
    summary.center_feature = block.features.row(center[c]).transpose();
    summary.center_distance = (block.features.row(center[c]) - block_center).norm();
  }
  outcome.assignment = std::move(assignment);
  return outcome;
}

void write_assignment_csv(const ClusterOutcome& outcome, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "index,cluster\n";
  for (std::size_t i = 0; i < outcome.assignment.size(); ++i) {
    out << i << ',' << outcome.assignment[i] << '\n';
  }
}

ResultCache::Key ResultCache::key_for(const ParamCombo& params) {
  return Key{static_cast<std::int64_t>(std::llround(params.eps * 1e12)), params.minpts};
}

std::shared_ptr<const ClusterOutcome> ResultCache::find(const ParamCombo& params) const {
  const auto it = entries_.find(key_for(params));
  return it == entries_.end() ? nullptr : it->second;
}

void ResultCache::insert(const ParamCombo& params, std::shared_ptr<const ClusterOutcome> outcome) {
  entries_[key_for(params)] = std::move(outcome);
}

std::shared_ptr<const ClusterOutcome> cached_cluster(ResultCache& cache, const DataBlock& block,
                                                     const ParamCombo& params) {
  if (auto hit = cache.find(params)) {
    ++cache.hits_;
    return hit;
  }
  ++cache.misses_;
  auto outcome = std::make_shared<const ClusterOutcome>(cluster(block, params));
  cache.insert(params, outcome);
  return outcome;
}

}  // namespace drld
