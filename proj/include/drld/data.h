#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace drld {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = std::vector<int>;

// Features as read from disk, before any scaling.
struct RawDataset {
  RowMatrix features;
  std::optional<Labels> labels;
  // Original label text for each class id (labels are dense ids in order of
  // first appearance).
  std::vector<std::string> label_names;
  std::string name;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }
};

// Min-max normalized block: the clustering environment.
struct DataBlock {
  RowMatrix features;
  std::optional<Labels> labels;
  int block_index = 1;
  Eigen::VectorXd centroid;
  Eigen::Index center_object_index = 0;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }
  auto center_object() const { return features.row(center_object_index); }
};

struct PartialLabels {
  std::vector<Eigen::Index> indices;  // sorted, distinct
  Labels values;                      // aligned with indices
  double proportion = 1.0;

  std::size_t size() const { return indices.size(); }
};

struct CsvOptions {
  bool has_labels = false;
  bool skip_header = false;
};

// Reads a comma-separated file (tab/space-separated files are accepted when a
// line has no comma). The label, when present, is the last field.
RawDataset load_csv(const std::string& path, const CsvOptions& options);
RawDataset parse_csv(std::istream& in, const CsvOptions& options, std::string name = "");

// Per-dimension min-max scaling to [0,1]; constant dimensions map to 0.
DataBlock normalize(const RawDataset& dataset, int block_index = 1);

// Contiguous row-order slices; the last block absorbs the remainder. Each
// block is normalized on its own.
std::vector<DataBlock> partition_stream(const RawDataset& dataset, int num_blocks);

// Uniform sample without replacement of round(proportion * n) rows (at least one).
PartialLabels mask_labels(const DataBlock& block, double proportion, std::uint64_t seed);

// Gaussian blobs whose centers drift linearly across the stream. Rows are in
// time order: block t occupies rows [t*rows_per_block, (t+1)*rows_per_block).
struct SyntheticStreamSpec {
  int num_blocks = 16;
  int rows_per_block = 400;
  int clusters = 4;
  int dims = 2;
  double spread = 0.6;        // per-cluster standard deviation
  double drift = 0.15;        // center displacement per block
  std::uint64_t seed = 7;
};

RawDataset synthetic_stream(const SyntheticStreamSpec& spec);

}  // namespace drld
