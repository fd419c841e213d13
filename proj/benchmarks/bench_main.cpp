#include <benchmark/benchmark.h>

#include <vector>

#include "amgcn/config.hpp"
#include "amgcn/data.hpp"
#include "amgcn/graph.hpp"
#include "amgcn/model.hpp"
#include "amgcn/training.hpp"

using namespace amgcn;

namespace {

// Case-1 style instance scaled to `n` nodes with the same expected degree.
LabeledDataset instance(std::size_t n) {
  SyntheticSpec spec = SyntheticSpec::case1(1);
  spec.n = n - n % 3;
  spec.p_uniform = 27.0 / static_cast<double>(spec.n);
  spec.train_per_class = 20;
  spec.test_per_class = 10;
  return generate_synthetic(spec);
}

DenseMatrix random_dense(std::size_t rows, std::size_t cols) {
  Rng rng(3);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  const LabeledDataset ds = instance(n);
  const NormalizedAdjacency adj = normalize_adjacency(ds.graph);
  const DenseMatrix h = random_dense(ds.num_nodes(), cols);
  for (auto _ : state) benchmark::DoNotOptimize(spmm(adj, h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(adj.col_idx.size() * cols));
}
BENCHMARK(BM_Spmm)->Args({900, 16})->Args({900, 64})->Args({3000, 64})->Unit(benchmark::kMicrosecond);

void BM_KnnGraph(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const LabeledDataset ds = instance(n);
  for (auto _ : state) benchmark::DoNotOptimize(build_knn_graph(ds.features, k, {}));
}
BENCHMARK(BM_KnnGraph)->Args({900, 7})->Args({900, 300})->Args({3000, 7})->Unit(benchmark::kMillisecond);

struct EpochFixture {
  LabeledDataset ds;
  GraphInputs inputs;
  ModelParams params;
  TrainConfig config;

  explicit EpochFixture(std::size_t k) : ds(instance(900)), config(synthetic_defaults()) {
    config.k = k;
    inputs = prepare_inputs(ds, config);
    Rng rng(1);
    params = ModelParams::initialize(config.model_shape(ds.num_features(), ds.num_classes()), rng);
  }
};

void BM_TrainingForward(benchmark::State& state) {
  EpochFixture f(static_cast<std::size_t>(state.range(0)));
  const ForwardOptions opts{true, f.config.dropout, f.config.channels};
  std::uint64_t e = 0;
  for (auto _ : state) {
    Rng rng = Rng(f.config.seed).split(100 + e++);
    benchmark::DoNotOptimize(full_forward(f.inputs, f.params, opts, &rng));
  }
}
BENCHMARK(BM_TrainingForward)->Arg(7)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  EpochFixture f(static_cast<std::size_t>(state.range(0)));
  Rng rng = Rng(f.config.seed).split(100);
  const ForwardState s =
      full_forward(f.inputs, f.params, {true, f.config.dropout, f.config.channels}, &rng);
  const Supervision sup{f.ds.labels, f.ds.split.train};
  const ObjectiveOptions obj{f.config.loss_weights(), f.config.ce_mean};
  for (auto _ : state) benchmark::DoNotOptimize(backward(s, f.inputs, f.params, sup, obj));
}
BENCHMARK(BM_Backward)->Arg(7)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_TrainEpochs(benchmark::State& state) {
  EpochFixture f(300);
  f.config.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(f.ds, f.inputs, f.config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpochs)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
