#include "amgcn/training.hpp"

#include <cmath>
#include <sstream>

#include "amgcn/error.hpp"

namespace amgcn {
namespace {

double split_accuracy(const DenseMatrix& probabilities, std::span<const int> labels,
                      std::span<const std::size_t> idx) {
  if (idx.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i : idx) {
    const auto row = probabilities.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

std::array<double, kNumChannels> mean_alpha(const DenseMatrix& alpha) {
  std::array<double, kNumChannels> out{};
  for (std::size_t i = 0; i < alpha.rows(); ++i) {
    for (std::size_t e = 0; e < kNumChannels; ++e) out[e] += alpha(i, e);
  }
  for (double& v : out) v /= static_cast<double>(alpha.rows());
  return out;
}

}  // namespace

GraphInputs prepare_inputs(const LabeledDataset& ds, const TrainConfig& config) {
  GraphInputs inputs;
  inputs.features = ds.features;
  inputs.topology = normalize_adjacency(ds.graph);
  inputs.feature = normalize_adjacency(build_knn_graph(ds.features, config.k, config.metric));
  return inputs;
}

TrainResult train(const LabeledDataset& ds, const TrainConfig& config) {
  config.validate();
  return train(ds, prepare_inputs(ds, config), config);
}

TrainResult train(const LabeledDataset& ds, const GraphInputs& inputs, const TrainConfig& config) {
  config.validate();
  Split split = ds.split;
  if (split.train.empty()) {
    split = make_split(ds.labels, config.labels_per_class, config.test_size, config.seed);
  }
  require(!split.train.empty(), ErrorCode::InvalidInput, "train: empty training split");

  const Supervision sup{ds.labels, split.train};
  const ObjectiveOptions objective{config.loss_weights(), config.ce_mean};
  const Rng root(config.seed);
  Rng init_rng = root.split(1);

  TrainResult result;
  result.params =
      ModelParams::initialize(config.model_shape(ds.num_features(), ds.num_classes()), init_rng);
  AdamState adam = AdamState::for_params(result.params, config.lr, config.weight_decay);
  adam.decay_channel_weights_only = config.decay_channel_weights_only;

  ForwardOptions train_mode;
  train_mode.training = true;
  train_mode.dropout = config.dropout;
  train_mode.channels = config.channels;
  ForwardOptions eval_mode;
  eval_mode.channels = config.channels;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng dropout_rng = root.split(100 + epoch);
    const ForwardState state = full_forward(inputs, result.params, train_mode, &dropout_rng);
    EpochRecord record;
    record.epoch = epoch;
    record.loss = evaluate_objective(state, sup, objective);
    if (!std::isfinite(record.loss.total)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at epoch " << epoch << " (task=" << record.loss.task
          << ", consistency=" << record.loss.consistency << ", disparity=" << record.loss.disparity
          << ")";
      throw Error(ErrorCode::NumericalFailure, msg.str());
    }
    const Gradients grads = backward(state, inputs, result.params, sup, objective);
    adam_step(result.params, grads, adam);

    ForwardState eval_state = full_forward(inputs, result.params, eval_mode);
    record.train_accuracy = split_accuracy(eval_state.probabilities, ds.labels, split.train);
    record.test_accuracy = split_accuracy(eval_state.probabilities, ds.labels, split.test);
    record.mean_alpha = mean_alpha(eval_state.alpha);
    result.history.epochs.push_back(record);
    result.final_state = std::move(eval_state);
  }
  if (!result.final_state.all_finite()) {
    throw Error(ErrorCode::NumericalFailure, "train: final forward pass is not finite");
  }
  return result;
}

}  // namespace amgcn
