// Randomized invariants. Each case draws its instances from a fixed seed so
// a failure reproduces exactly; INFO prints the trial index.

#include <cmath>
#include <vector>

#include "amgcn/config.hpp"
#include "amgcn/data.hpp"
#include "amgcn/graph.hpp"
#include "amgcn/losses.hpp"
#include "amgcn/model.hpp"
#include "amgcn/training.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace amgcn;

namespace {

constexpr int kTrials = 200;

struct Instance {
  std::size_t n;
  std::size_t h;
};

Instance draw(Rng& rng, std::size_t max_n = 20) {
  return {2 + rng.below(max_n - 1), 1 + rng.below(8)};
}

}  // namespace

TEST_CASE("property: attention rows are a distribution") {
  Rng rng(101);
  for (int t = 0; t < kTrials; ++t) {
    INFO("trial " << t);
    const auto [n, h] = draw(rng);
    ModelShape shape{4, 4, h, 1 + rng.below(5), 3, rng.bernoulli(0.5)};
    Rng init = rng.split(static_cast<std::uint64_t>(t));
    const ModelParams p = ModelParams::initialize(shape, init);
    const double scale = rng.uniform(0.1, 20.0);
    const DenseMatrix zt = oracle::random_matrix(rng, n, h, -scale, scale);
    const DenseMatrix zc = oracle::random_matrix(rng, n, h, -scale, scale);
    const DenseMatrix zf = oracle::random_matrix(rng, n, h, -scale, scale);
    const FusionOutput f = attention_fuse(zt, zc, zf, p.attn);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t e = 0; e < kNumChannels; ++e) {
        CHECK(f.alpha(i, e) >= 0.0);
        s += f.alpha(i, e);
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("property: hsic vanishes against constant rows and is symmetric") {
  Rng rng(202);
  for (int t = 0; t < kTrials; ++t) {
    INFO("trial " << t);
    const auto [n, h] = draw(rng);
    const DenseMatrix a = oracle::random_matrix(rng, n, h, -5, 5);
    const DenseMatrix b = oracle::random_matrix(rng, n, 1 + rng.below(6), -5, 5);
    DenseMatrix constant(n, h);
    const DenseMatrix row = oracle::random_matrix(rng, 1, h, -5, 5);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < h; ++c) constant(i, c) = row(0, c);
    CHECK(std::abs(hsic(a, constant)) < 1e-10);
    const double ab = hsic(a, b), ba = hsic(b, a);
    CHECK(std::abs(ab - ba) <= 1e-12 * std::max(1.0, std::abs(ab)));
    CHECK(ab >= -1e-12);
  }
}

TEST_CASE("property: consistency loss ignores positive row scaling") {
  Rng rng(303);
  for (int t = 0; t < kTrials; ++t) {
    INFO("trial " << t);
    const auto [n, h] = draw(rng);
    const DenseMatrix a = oracle::random_matrix(rng, n, h);
    const DenseMatrix b = oracle::random_matrix(rng, n, h);
    DenseMatrix a2 = a, b2 = b;
    for (std::size_t i = 0; i < n; ++i) {
      const double sa = rng.uniform(0.01, 100.0), sb = rng.uniform(0.01, 100.0);
      for (std::size_t c = 0; c < h; ++c) {
        a2(i, c) *= sa;
        b2(i, c) *= sb;
      }
    }
    const double base = consistency_loss(a, b);
    CHECK(std::abs(consistency_loss(a2, b2) - base) < 1e-9 * std::max(1.0, base));
    CHECK(consistency_loss(a, a) < 1e-10);
  }
}

TEST_CASE("property: knn graphs are symmetric with bounded degree") {
  Rng rng(404);
  for (int t = 0; t < kTrials; ++t) {
    INFO("trial " << t);
    const std::size_t n = 2 + rng.below(30);
    const std::size_t k = 1 + rng.below(n - 1);
    const DenseMatrix x = oracle::random_matrix(rng, n, 1 + rng.below(6));
    const SimilarityMetric metric =
        rng.bernoulli(0.5) ? SimilarityMetric::cosine() : SimilarityMetric::heat(rng.uniform(0.5, 4));
    const SparseGraph g = build_knn_graph(x, k, metric);
    g.validate();
    std::size_t degree_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(g.degree(i) >= k);
      CHECK(g.degree(i) <= n - 1);
      degree_sum += g.degree(i);
      for (std::size_t j : g.neighbors(i)) CHECK(g.has_edge(j, i));
    }
    CHECK(g.num_undirected_edges() <= n * k);
    CHECK(degree_sum == 2 * g.num_undirected_edges());
  }
}

TEST_CASE("property: normalized adjacency is symmetric with spectral-safe row sums") {
  Rng rng(505);
  for (int t = 0; t < kTrials; ++t) {
    INFO("trial " << t);
    const std::size_t n = 1 + rng.below(20);
    std::vector<Edge> edges;
    const double p = rng.uniform();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.bernoulli(p)) edges.push_back({i, j});
    const DenseMatrix d = normalize_adjacency(SparseGraph::from_edges(n, edges)).to_dense();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(d(i, j) == d(j, i));
        CHECK(d(i, j) >= 0.0);
        CHECK(d(i, j) <= 1.0);
      }
  }
}

TEST_CASE("property: seeded runs are deterministic") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    INFO("seed " << seed);
    SyntheticSpec spec = SyntheticSpec::case2(seed);
    spec.n = 60;
    spec.d = 6;
    spec.p_intra = 0.3;
    spec.p_inter = 0.02;
    spec.train_per_class = 4;
    spec.test_per_class = 10;
    const LabeledDataset a = generate_synthetic(spec);
    CHECK(a == generate_synthetic(spec));
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.nhid1 = 8;
    cfg.nhid2 = 4;
    cfg.epochs = 4;
    cfg.k = 3;
    const TrainResult r1 = train(a, cfg);
    const TrainResult r2 = train(a, cfg);
    CHECK(r1.history == r2.history);
    CHECK(r1.params == r2.params);
    CHECK(r1.final_state.z == r2.final_state.z);
  }
}
