#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "amgcn/config.hpp"
#include "amgcn/data.hpp"
#include "amgcn/losses.hpp"
#include "amgcn/model.hpp"

namespace amgcn {

struct Supervision {
  std::span<const int> labels;
  std::span<const std::size_t> train_idx;
};

struct ObjectiveOptions {
  LossWeights weights;
  bool ce_mean = false;
};

// Loss terms for a forward state. Constraint terms whose channels are masked
// out are reported as 0.
LossBreakdown evaluate_objective(const ForwardState& state, const Supervision& sup,
                                 const ObjectiveOptions& options);

// Selects which of the two shared-weight branches of the common channel
// receive gradient; both by default.
struct BackwardOptions {
  bool common_topology_branch = true;
  bool common_feature_branch = true;
};

// Exact gradient of the total objective for the sampled subnetwork cached in
// `state`. Throws ContractViolation when the state carries no caches.
Gradients backward(const ForwardState& state, const GraphInputs& inputs, const ModelParams& params,
                   const Supervision& sup, const ObjectiveOptions& options,
                   const BackwardOptions& branches = {});

// Accumulates the weight gradients of one two-layer channel into `grad` and
// returns nothing; `upstream` is dL/d(channel output).
void channel_backward(const NormalizedAdjacency& adj, const ChannelCache& cache,
                      const GcnChannelParams& params, const DenseMatrix& upstream,
                      GcnChannelParams& grad);

// ---------------------------------------------------------------------------
// Finite-difference verification

struct TensorCheck {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries = 0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double tolerance = 0.0;
  bool all_pass() const;
};

struct GradCheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the entry-wise relative error
  // |a - n| / max(|a|, |n|, floor).
  double floor = 1e-5;
};

struct GradCheckProblem {
  GraphInputs inputs;
  std::vector<int> labels;
  std::vector<std::size_t> train_idx;
  ModelParams params;
  ChannelMask channels;

  Supervision supervision() const { return {labels, train_idx}; }
};

struct GradCheckSize {
  std::size_t n = 30;
  std::size_t d = 8;
  std::size_t classes = 3;
  std::size_t nhid1 = 8;
  std::size_t nhid2 = 4;
  std::size_t k = 3;
  double edge_probability = 0.15;
  std::size_t train_nodes = 12;
};

// Seeded random graph, features and labels plus freshly initialized
// parameters. Attention width and per-channel flag come from `config`.
GradCheckProblem make_gradcheck_problem(std::uint64_t seed, const TrainConfig& config,
                                        const GradCheckSize& size = {});

// Central differences against backward() on every entry of every tensor.
// `tamper` may modify the analytic gradient before comparison.
GradCheckReport check_gradients(const GradCheckProblem& problem, const ObjectiveOptions& objective,
                                const GradCheckOptions& options = {},
                                const std::function<void(Gradients&)>& tamper = {});

// Builds the problem from `config` (dropout forced to 0, variant weights
// applied) and checks it.
GradCheckReport finite_difference_check(const TrainConfig& config, std::uint64_t seed,
                                        const GradCheckOptions& options = {},
                                        const GradCheckSize& size = {});

// ---------------------------------------------------------------------------
// Optimizer

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  bool decay_channel_weights_only = false;

  static AdamState for_params(const ModelParams& params, double lr, double weight_decay);
};

// Bias-corrected Adam. Weight decay is decoupled: lr * wd * theta is
// subtracted from every weight tensor (biases never decay).
void adam_step(ModelParams& params, const Gradients& grads, AdamState& opt);

// ---------------------------------------------------------------------------
// Training loop

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown loss;  // training-mode objective that was optimized
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::array<double, kNumChannels> mean_alpha{};  // eval mode, over all nodes

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

// Builds the kNN feature graph from the dataset features and normalizes both
// graphs.
GraphInputs prepare_inputs(const LabeledDataset& ds, const TrainConfig& config);

struct TrainResult {
  ModelParams params;
  TrainHistory history;
  ForwardState final_state;  // eval mode
};

// Full-batch training for config.epochs steps. Random streams derived from
// config.seed: split(1) parameter init, split(100 + e) dropout in epoch e.
// Throws NumericalFailure if the loss becomes non-finite.
TrainResult train(const LabeledDataset& ds, const TrainConfig& config);
TrainResult train(const LabeledDataset& ds, const GraphInputs& inputs, const TrainConfig& config);

}  // namespace amgcn
