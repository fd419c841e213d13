#include <cmath>

#include "amgcn/config.hpp"
#include "amgcn/data.hpp"
#include "amgcn/error.hpp"
#include "amgcn/eval.hpp"
#include "amgcn/training.hpp"
#include "doctest.h"

using namespace amgcn;

namespace {

LabeledDataset small_case1(std::uint64_t seed) {
  SyntheticSpec spec = SyntheticSpec::case1(seed);
  spec.n = 150;
  spec.p_uniform = 0.1;
  spec.train_per_class = 10;
  spec.test_per_class = 30;
  return generate_synthetic(spec);
}

TrainConfig quick_config() {
  TrainConfig cfg = synthetic_defaults();
  cfg.epochs = 15;
  cfg.nhid1 = 16;
  cfg.nhid2 = 8;
  cfg.k = 5;
  return cfg;
}

}  // namespace

TEST_CASE("train: the same seed reproduces the whole history") {
  const LabeledDataset ds = small_case1(1);
  const TrainConfig cfg = quick_config();
  const TrainResult a = train(ds, cfg);
  const TrainResult b = train(ds, cfg);
  CHECK(a.history == b.history);
  CHECK(a.params == b.params);
  TrainConfig other = cfg;
  other.seed = 2;
  CHECK_FALSE(train(ds, other).params == a.params);
}

TEST_CASE("train: without constraints the loss is the task loss") {
  const LabeledDataset ds = small_case1(2);
  TrainConfig cfg = quick_config();
  cfg.variant = Variant::WithoutConstraints;
  const TrainResult r = train(ds, cfg);
  REQUIRE(r.history.epochs.size() == cfg.epochs);
  for (const auto& e : r.history.epochs) CHECK(e.loss.total == e.loss.task);
}

TEST_CASE("train: the loss decreases on case 1") {
  const LabeledDataset ds = generate_case1(3);
  TrainConfig cfg = synthetic_defaults();
  cfg.epochs = 11;
  const TrainResult r = train(ds, cfg);
  CHECK(r.history.epochs.back().loss.total < r.history.epochs.front().loss.total);
  CHECK_FALSE(r.final_state.has_cache);
}

TEST_CASE("train: case 1 with the synthetic defaults reaches 0.95") {
  const LabeledDataset ds = generate_case1(1);
  const TrainResult r = train(ds, synthetic_defaults());
  const auto pred = predict(r.final_state.probabilities);
  CHECK(accuracy(pred, ds.labels, ds.split.test) >= 0.95);
  const auto report = attention_report(r.history, r.final_state);
  CHECK(report.mean[index_of(Channel::Feature)] > report.mean[index_of(Channel::Topology)]);
}

TEST_CASE("train: a dataset without a split gets one drawn") {
  LabeledDataset ds = small_case1(4);
  ds.split = {};
  TrainConfig cfg = quick_config();
  cfg.epochs = 2;
  cfg.labels_per_class = 5;
  cfg.test_size = 40;
  const TrainResult r = train(ds, cfg);
  CHECK(r.history.epochs.size() == 2);
}

TEST_CASE("train: ablation masks zero the inactive attention") {
  const LabeledDataset ds = small_case1(5);
  TrainConfig cfg = quick_config();
  cfg.channels = ChannelMask::feature_only();
  const TrainResult r = train(ds, cfg);
  for (std::size_t i = 0; i < ds.num_nodes(); ++i) {
    CHECK(r.final_state.alpha(i, 0) == 0.0);
    CHECK(r.final_state.alpha(i, 2) == 1.0);
  }
}

TEST_CASE("train: invalid configuration is rejected up front") {
  const LabeledDataset ds = small_case1(6);
  TrainConfig cfg = quick_config();
  cfg.dropout = 1.0;
  CHECK_THROWS_AS((void)train(ds, cfg), Error);
  cfg = quick_config();
  cfg.k = ds.num_nodes();
  CHECK_THROWS_AS((void)train(ds, cfg), Error);
}
