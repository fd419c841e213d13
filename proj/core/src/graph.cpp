#include "amgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "amgcn/error.hpp"

namespace amgcn {
namespace {

void require_finite(const DenseMatrix& x, const char* where) {
  require(x.all_finite(), ErrorCode::InvalidInput,
          std::string(where) + ": feature matrix contains non-finite entries");
}

}  // namespace

SparseGraph SparseGraph::from_edges(std::size_t n, std::span<const Edge> edges,
                                    BuildStats* stats) {
  BuildStats local;
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "edge (" + std::to_string(i) + ", " +
                                                  std::to_string(j) + ") outside node range " +
                                                  std::to_string(n));
    }
    if (i == j) {
      ++local.self_loops_dropped;
      continue;
    }
    directed.emplace_back(i, j);
    directed.emplace_back(j, i);
  }
  std::sort(directed.begin(), directed.end());
  const auto unique_end = std::unique(directed.begin(), directed.end());
  // Each merged undirected duplicate removes two directed copies.
  local.duplicates_merged = static_cast<std::size_t>(directed.end() - unique_end) / 2;
  directed.erase(unique_end, directed.end());

  SparseGraph g;
  g.n = n;
  g.row_ptr.assign(n + 1, 0);
  g.col_idx.reserve(directed.size());
  for (const auto& [i, j] : directed) {
    ++g.row_ptr[i + 1];
    g.col_idx.push_back(j);
  }
  std::partial_sum(g.row_ptr.begin(), g.row_ptr.end(), g.row_ptr.begin());
  g.values.assign(g.col_idx.size(), 1.0);
  if (stats != nullptr) *stats = local;
  return g;
}

bool SparseGraph::has_edge(std::size_t i, std::size_t j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> SparseGraph::undirected_edges() const {
  std::vector<Edge> out;
  out.reserve(num_undirected_edges());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

void SparseGraph::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::ContractViolation, "SparseGraph: " + what);
  };
  if (row_ptr.size() != n + 1 || row_ptr.front() != 0 || row_ptr.back() != col_idx.size()) {
    fail("row_ptr inconsistent with node or entry count");
  }
  if (values.size() != col_idx.size()) fail("values/col_idx length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (row_ptr[i] > row_ptr[i + 1]) fail("row_ptr not monotone");
    const auto nb = neighbors(i);
    for (std::size_t p = 0; p < nb.size(); ++p) {
      const std::size_t j = nb[p];
      if (j >= n) fail("column index out of range");
      if (j == i) fail("self-loop stored at node " + std::to_string(i));
      if (p > 0 && nb[p - 1] >= j) fail("columns unsorted or duplicated in row " + std::to_string(i));
      if (!has_edge(j, i)) fail("asymmetric edge");
    }
  }
}

DenseMatrix NormalizedAdjacency::to_dense() const {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) out(i, col_idx[p]) = values[p];
  }
  return out;
}

DenseMatrix cosine_similarity(const DenseMatrix& x) {
  require_finite(x, "cosine_similarity");
  const std::size_t n = x.rows();
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : x.row(i)) s += v * v;
    norms[i] = std::sqrt(s);
  }
  DenseMatrix sim = matmul_nt(x, x);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (norms[i] == 0.0 || norms[j] == 0.0) {
        sim(i, j) = 0.0;
      } else if (i == j) {
        sim(i, j) = 1.0;
      } else {
        sim(i, j) = std::clamp(sim(i, j) / (norms[i] * norms[j]), -1.0, 1.0);
      }
    }
  }
  // The GEMM is not guaranteed to be bitwise symmetric.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sim(j, i) = sim(i, j);
  }
  return sim;
}

DenseMatrix heat_kernel_similarity(const DenseMatrix& x, double t) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidInput,
          "heat_kernel_similarity: t must be positive, got " + std::to_string(t));
  require_finite(x, "heat_kernel_similarity");
  const std::size_t n = x.rows();
  DenseMatrix sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    sim(i, i) = 1.0;
    const auto xi = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto xj = x.row(j);
      double dist_sq = 0.0;
      for (std::size_t c = 0; c < xi.size(); ++c) {
        const double d = xi[c] - xj[c];
        dist_sq += d * d;
      }
      const double s = std::exp(-dist_sq / t);
      sim(i, j) = s;
      sim(j, i) = s;
    }
  }
  return sim;
}

DenseMatrix similarity(const DenseMatrix& x, const SimilarityMetric& metric) {
  switch (metric.kind) {
    case SimilarityKind::Cosine: return cosine_similarity(x);
    case SimilarityKind::HeatKernel: return heat_kernel_similarity(x, metric.t);
  }
  throw Error(ErrorCode::InvalidInput, "similarity: unknown metric");
}

SparseGraph build_knn_graph(const DenseMatrix& x, std::size_t k, const SimilarityMetric& metric) {
  const std::size_t n = x.rows();
  require(k >= 1 && k < n, ErrorCode::InvalidInput,
          "build_knn_graph: k must satisfy 1 <= k <= n-1 (k=" + std::to_string(k) +
              ", n=" + std::to_string(n) + ")");
  const DenseMatrix sim = similarity(x, metric);

  std::vector<Edge> edges;
  edges.reserve(n * k);
  std::vector<std::size_t> candidates(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) candidates[c++] = j;
    }
    const auto row = sim.row(i);
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), [&](std::size_t a, std::size_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    for (std::size_t p = 0; p < k; ++p) edges.emplace_back(i, candidates[p]);
  }
  return SparseGraph::from_edges(n, edges);
}

NormalizedAdjacency normalize_adjacency(const SparseGraph& g) {
  const std::size_t n = g.n;
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  }

  NormalizedAdjacency out;
  out.n = n;
  out.row_ptr.assign(n + 1, 0);
  out.col_idx.reserve(g.col_idx.size() + n);
  out.values.reserve(g.col_idx.size() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool diagonal_done = false;
    auto emit = [&](std::size_t j) {
      out.col_idx.push_back(j);
      out.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    };
    for (std::size_t j : g.neighbors(i)) {
      if (!diagonal_done && j > i) {
        emit(i);
        diagonal_done = true;
      }
      emit(j);
    }
    if (!diagonal_done) emit(i);
    out.row_ptr[i + 1] = out.col_idx.size();
  }
  return out;
}

DenseMatrix spmm(const NormalizedAdjacency& adj, const DenseMatrix& h) {
  if (h.rows() != adj.n) {
    throw Error(ErrorCode::DimensionMismatch,
                "spmm: adjacency is " + std::to_string(adj.n) + "x" + std::to_string(adj.n) +
                    " but dense operand has " + std::to_string(h.rows()) + " rows");
  }
  DenseMatrix out(adj.n, h.cols());
  for (std::size_t i = 0; i < adj.n; ++i) {
    auto dst = out.row(i);
    for (std::size_t p = adj.row_ptr[i]; p < adj.row_ptr[i + 1]; ++p) {
      const double w = adj.values[p];
      const auto src = h.row(adj.col_idx[p]);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

}  // namespace amgcn
