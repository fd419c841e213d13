#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "amgcn/dense.hpp"
#include "amgcn/graph.hpp"

namespace amgcn {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  friend bool operator==(const Split&, const Split&) = default;
};

struct LabeledDataset {
  SparseGraph graph;
  DenseMatrix features;      // n x d
  std::vector<int> labels;   // class ids in [0, C)
  Split split;

  std::size_t num_nodes() const { return features.rows(); }
  std::size_t num_features() const { return features.cols(); }
  std::size_t num_classes() const;

  // Throws on any broken invariant (shape, label coverage, split overlap).
  void validate() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

enum class SyntheticCase { GaussianFeatures, SbmTopology };

struct SyntheticSpec {
  SyntheticCase kind = SyntheticCase::GaussianFeatures;
  std::size_t n = 900;
  std::size_t d = 50;
  std::size_t classes = 3;
  double p_uniform = 0.03;          // Erdos-Renyi edge probability (Gaussian case)
  double p_intra = 0.03;            // SBM within-block probability
  double p_inter = 0.0015;          // SBM between-block probability
  double center_separation = 10.0;  // pairwise distance of class centers
  std::size_t train_per_class = 20;
  std::size_t test_per_class = 200;
  std::uint64_t seed = 0;

  static SyntheticSpec case1(std::uint64_t seed);
  static SyntheticSpec case2(std::uint64_t seed);
};

// Random streams: split(0) topology, split(1) labels, split(2) features,
// split(3) train/test draw.
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

// Erdos-Renyi topology, random balanced labels, class-conditional unit
// Gaussians around simplex centers.
LabeledDataset generate_case1(std::uint64_t seed);

// Three-block SBM topology, label = block, i.i.d. standard normal features.
LabeledDataset generate_case2(std::uint64_t seed);

// Per class: `per_class_train` training nodes drawn uniformly, then
// `per_class_test` test nodes from the remainder of the same class.
Split make_per_class_split(std::span<const int> labels, std::size_t per_class_train,
                           std::size_t per_class_test, std::uint64_t seed);

// `labels_per_class` training nodes per class drawn uniformly, then `test_size`
// test nodes drawn uniformly from all remaining nodes.
Split make_split(std::span<const int> labels, std::size_t labels_per_class,
                 std::size_t test_size, std::uint64_t seed);

struct LoadReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges = 0;
  bool split_present = false;
};

// Directory layout: edges.tsv, features.csv, labels.tsv, optional split.json.
// Without split.json the returned split is empty.
LabeledDataset load_dataset(const std::filesystem::path& dir, LoadReport* report = nullptr);

// Writes the same layout; doubles are printed with 17 significant digits so a
// load reproduces them exactly.
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir);

void write_edges(const SparseGraph& g, const std::filesystem::path& file);

}  // namespace amgcn
