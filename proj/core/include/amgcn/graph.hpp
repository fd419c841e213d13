#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "amgcn/dense.hpp"

namespace amgcn {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected, unweighted graph in CSR form. Every edge is stored in both
// directions, columns are sorted within a row, no duplicates, no self-loops.
struct SparseGraph {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  struct BuildStats {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_merged = 0;
  };

  // Symmetrizes by union; drops self-loops; merges duplicates.
  static SparseGraph from_edges(std::size_t n, std::span<const Edge> edges,
                                BuildStats* stats = nullptr);

  std::size_t degree(std::size_t i) const { return row_ptr[i + 1] - row_ptr[i]; }
  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {col_idx.data() + row_ptr[i], degree(i)};
  }
  bool has_edge(std::size_t i, std::size_t j) const;
  std::size_t num_undirected_edges() const { return col_idx.size() / 2; }
  std::vector<Edge> undirected_edges() const;  // (i, j) with i < j, sorted

  // Throws ContractViolation if any structural invariant is broken.
  void validate() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;
};

// D^-1/2 (A + I) D^-1/2 with D the degree of A + I. Same CSR layout as
// SparseGraph but each row also stores its diagonal entry.
struct NormalizedAdjacency {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  DenseMatrix to_dense() const;
};

enum class SimilarityKind { Cosine, HeatKernel };

struct SimilarityMetric {
  SimilarityKind kind = SimilarityKind::Cosine;
  double t = 2.0;  // heat-kernel time parameter

  static SimilarityMetric cosine() { return {}; }
  static SimilarityMetric heat(double t = 2.0) { return {SimilarityKind::HeatKernel, t}; }

  friend bool operator==(const SimilarityMetric&, const SimilarityMetric&) = default;
};

// n x n cosine similarity. Pairs involving a zero-norm row get 0, including
// that row's diagonal.
DenseMatrix cosine_similarity(const DenseMatrix& x);

// n x n exp(-|x_i - x_j|^2 / t), t > 0.
DenseMatrix heat_kernel_similarity(const DenseMatrix& x, double t);

DenseMatrix similarity(const DenseMatrix& x, const SimilarityMetric& metric);

// Each node links to its k most similar other nodes (ties -> lower index),
// then the directed edge set is symmetrized by union. Materializes the dense
// n x n similarity matrix, so memory is n^2 * 8 bytes.
SparseGraph build_knn_graph(const DenseMatrix& x, std::size_t k, const SimilarityMetric& metric);

NormalizedAdjacency normalize_adjacency(const SparseGraph& g);

// N * H. Each output row is accumulated in ascending column order.
DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h);

}  // namespace amgcn
