#include "drld/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "drld/error.h"

namespace drld {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      fields.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool parse_double(std::string_view field, double& out) {
  if (field.empty()) return false;
  // std::from_chars rejects a leading '+'.
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void check_finite(const RowMatrix& features) {
  if (!features.allFinite()) throw DataError("non-finite feature value");
}

}  // namespace

RawDataset parse_csv(std::istream& in, const CsvOptions& options, std::string name) {
  std::vector<double> values;
  Labels labels;
  std::vector<std::string> label_names;
  std::unordered_map<std::string, int> label_ids;
  Eigen::Index dims = -1;
  Eigen::Index rows = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && options.skip_header) continue;
    const auto content = trim(line);
    if (content.empty()) continue;

    const auto fields = split_fields(content);
    const Eigen::Index n_numeric =
        static_cast<Eigen::Index>(fields.size()) - (options.has_labels ? 1 : 0);
    if (n_numeric < 1) throw ParseError(line_no, "expected at least one feature field");
    if (dims < 0) {
      dims = n_numeric;
    } else if (n_numeric != dims) {
      throw ParseError(line_no, "expected " + std::to_string(dims) + " feature fields, found " +
                                    std::to_string(n_numeric));
    }
    for (Eigen::Index j = 0; j < n_numeric; ++j) {
      double v = 0.0;
      if (!parse_double(fields[static_cast<std::size_t>(j)], v)) {
        throw ParseError(line_no, "field " + std::to_string(j + 1) + " is not a number: '" +
                                      std::string(fields[static_cast<std::size_t>(j)]) + "'");
      }
      if (!std::isfinite(v)) throw ParseError(line_no, "non-finite value");
      values.push_back(v);
    }
    if (options.has_labels) {
      const std::string label(fields.back());
      if (label.empty()) throw ParseError(line_no, "empty label field");
      auto [it, inserted] = label_ids.try_emplace(label, static_cast<int>(label_names.size()));
      if (inserted) label_names.push_back(label);
      labels.push_back(it->second);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("empty dataset" + (name.empty() ? "" : ": " + name));

  RawDataset ds;
  ds.features = Eigen::Map<RowMatrix>(values.data(), rows, dims);
  if (options.has_labels) {
    ds.labels = std::move(labels);
    ds.label_names = std::move(label_names);
  }
  ds.name = std::move(name);
  return ds;
}

RawDataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_csv(in, options, path);
}

DataBlock normalize(const RawDataset& dataset, int block_index) {
  if (dataset.rows() < 1 || dataset.dims() < 1) throw DataError("empty dataset");
  check_finite(dataset.features);

  DataBlock block;
  block.block_index = block_index;
  block.labels = dataset.labels;
  block.features.resize(dataset.rows(), dataset.dims());
  for (Eigen::Index j = 0; j < dataset.dims(); ++j) {
    const auto col = dataset.features.col(j);
    const double lo = col.minCoeff();
    const double span = col.maxCoeff() - lo;
    if (span > 0.0) {
      // Clamp guards against 1 + ulp after the division.
      block.features.col(j) = ((col.array() - lo) / span).min(1.0).max(0.0).matrix();
    } else {
      block.features.col(j).setZero();
    }
  }

  block.centroid = block.features.colwise().mean().transpose();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    const double d = (block.features.row(i).transpose() - block.centroid).squaredNorm();
    if (d < best) {
      best = d;
      block.center_object_index = i;
    }
  }
  return block;
}

std::vector<DataBlock> partition_stream(const RawDataset& dataset, int num_blocks) {
  if (num_blocks < 1) throw DataError("num_blocks must be at least 1");
  if (dataset.rows() < num_blocks) {
    throw DataError("cannot split " + std::to_string(dataset.rows()) + " rows into " +
                    std::to_string(num_blocks) + " blocks");
  }
  const Eigen::Index size = dataset.rows() / num_blocks;
  std::vector<DataBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(num_blocks));
  for (int b = 0; b < num_blocks; ++b) {
    const Eigen::Index start = b * size;
    const Eigen::Index count = (b == num_blocks - 1) ? dataset.rows() - start : size;
    RawDataset slice;
    slice.features = dataset.features.middleRows(start, count);
    if (dataset.labels) {
      slice.labels = Labels(dataset.labels->begin() + start, dataset.labels->begin() + start + count);
    }
    slice.name = dataset.name;
    blocks.push_back(normalize(slice, b + 1));
  }
  return blocks;
}

PartialLabels mask_labels(const DataBlock& block, double proportion, std::uint64_t seed) {
  if (!block.labels) throw DataError("block " + std::to_string(block.block_index) + " has no labels");
  if (!(proportion > 0.0 && proportion <= 1.0)) throw DataError("label proportion must be in (0, 1]");

  const auto n = static_cast<std::size_t>(block.rows());
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(proportion * static_cast<double>(n))), 1, n);

  std::vector<Eigen::Index> all(n);
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  // Partial Fisher-Yates: the first `count` entries are the sample.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());

  PartialLabels partial;
  partial.proportion = proportion;
  partial.indices = std::move(all);
  partial.values.reserve(count);
  for (const auto idx : partial.indices) partial.values.push_back((*block.labels)[static_cast<std::size_t>(idx)]);
  return partial;
}

RawDataset synthetic_stream(const SyntheticStreamSpec& spec) {
  if (spec.num_blocks < 1 || spec.rows_per_block < 1 || spec.clusters < 1 || spec.dims < 1) {
    throw DataError("synthetic stream sizes must be positive");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 10.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Initial centers and a fixed drift direction per cluster.
  std::vector<Eigen::VectorXd> centers, directions;
  for (int c = 0; c < spec.clusters; ++c) {
    Eigen::VectorXd center(spec.dims), dir(spec.dims);
    for (int j = 0; j < spec.dims; ++j) {
      center[j] = unit(rng);
      dir[j] = gauss(rng);
    }
    centers.push_back(center);
    directions.push_back(dir.normalized());
  }

  const Eigen::Index n = static_cast<Eigen::Index>(spec.num_blocks) * spec.rows_per_block;
  RawDataset ds;
  ds.features.resize(n, spec.dims);
  Labels labels(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> which(0, spec.clusters - 1);
  for (int b = 0; b < spec.num_blocks; ++b) {
    for (int r = 0; r < spec.rows_per_block; ++r) {
      const Eigen::Index row = static_cast<Eigen::Index>(b) * spec.rows_per_block + r;
      const int c = which(rng);
      const Eigen::VectorXd center = centers[c] + (spec.drift * b) * directions[c];
      for (int j = 0; j < spec.dims; ++j) ds.features(row, j) = center[j] + spec.spread * gauss(rng);
      labels[static_cast<std::size_t>(row)] = c;
    }
  }
  for (int c = 0; c < spec.clusters; ++c) ds.label_names.push_back(std::to_string(c));
  ds.labels = std::move(labels);
  ds.name = "synthetic-stream";
  return ds;
}

}  // namespace drld
