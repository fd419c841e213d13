#include "amgcn/training.hpp"

#include <algorithm>
#include <cmath>

#include "amgcn/error.hpp"

namespace amgcn {

bool GradCheckReport::all_pass() const {
  return !tensors.empty() &&
         std::all_of(tensors.begin(), tensors.end(), [](const TensorCheck& t) { return t.pass; });
}

GradCheckProblem make_gradcheck_problem(std::uint64_t seed, const TrainConfig& config,
                                        const GradCheckSize& size) {
  require(size.n > size.k && size.classes >= 1 && size.train_nodes <= size.n,
          ErrorCode::InvalidInput, "gradcheck: inconsistent problem size");
  const Rng root(seed);
  Rng graph_rng = root.split(0);
  Rng feature_rng = root.split(1);
  Rng label_rng = root.split(2);
  Rng init_rng = root.split(3);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < size.n; ++i) {
    for (std::size_t j = i + 1; j < size.n; ++j) {
      if (graph_rng.bernoulli(size.edge_probability)) edges.emplace_back(i, j);
    }
  }
  const SparseGraph topology = SparseGraph::from_edges(size.n, edges);

  GradCheckProblem p;
  p.inputs.features = DenseMatrix(size.n, size.d);
  for (double& v : p.inputs.features.data()) v = feature_rng.normal();
  p.inputs.topology = normalize_adjacency(topology);
  p.inputs.feature =
      normalize_adjacency(build_knn_graph(p.inputs.features, size.k, config.metric));

  p.labels.resize(size.n);
  for (std::size_t i = 0; i < size.n; ++i) p.labels[i] = static_cast<int>(i % size.classes);
  label_rng.shuffle(std::span<int>(p.labels));
  std::vector<std::size_t> order(size.n);
  for (std::size_t i = 0; i < size.n; ++i) order[i] = i;
  label_rng.shuffle(std::span<std::size_t>(order));
  p.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(size.train_nodes));
  std::sort(p.train_idx.begin(), p.train_idx.end());

  TrainConfig shaped = config;
  shaped.nhid1 = size.nhid1;
  shaped.nhid2 = size.nhid2;
  p.params = ModelParams::initialize(shaped.model_shape(size.d, size.classes), init_rng);
  p.channels = config.channels;
  return p;
}

GradCheckReport check_gradients(const GradCheckProblem& problem, const ObjectiveOptions& objective,
                                const GradCheckOptions& options,
                                const std::function<void(Gradients&)>& tamper) {
  const Supervision sup = problem.supervision();
  ForwardOptions train_mode;
  train_mode.training = true;
  train_mode.dropout = 0.0;
  train_mode.channels = problem.channels;
  const ForwardState state = full_forward(problem.inputs, problem.params, train_mode);
  Gradients analytic = backward(state, problem.inputs, problem.params, sup, objective);
  if (tamper) tamper(analytic);

  ForwardOptions eval_mode;
  eval_mode.channels = problem.channels;
  ModelParams work = problem.params;
  auto loss_at = [&]() {
    return evaluate_objective(full_forward(problem.inputs, work, eval_mode), sup, objective).total;
  };

  GradCheckReport report;
  report.tolerance = options.tolerance;
  auto work_views = work.tensors();
  const auto analytic_views = std::as_const(analytic).tensors();
  for (std::size_t t = 0; t < work_views.size(); ++t) {
    TensorCheck check;
    check.name = work_views[t].name;
    auto values = work_views[t].values;
    const auto grad = analytic_views[t].values;
    check.entries = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + options.epsilon;
      const double plus = loss_at();
      values[i] = original - options.epsilon;
      const double minus = loss_at();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double abs_err = std::abs(numeric - grad[i]);
      const double denom = std::max({std::abs(numeric), std::abs(grad[i]), options.floor});
      check.max_abs_error = std::max(check.max_abs_error, abs_err);
      check.max_rel_error = std::max(check.max_rel_error, abs_err / denom);
    }
    check.pass = std::isfinite(check.max_rel_error) && check.max_rel_error < options.tolerance;
    report.tensors.push_back(std::move(check));
  }
  return report;
}

GradCheckReport finite_difference_check(const TrainConfig& config, std::uint64_t seed,
                                        const GradCheckOptions& options,
                                        const GradCheckSize& size) {
  const GradCheckProblem problem = make_gradcheck_problem(seed, config, size);
  const ObjectiveOptions objective{config.loss_weights(), config.ce_mean};
  return check_gradients(problem, objective, options);
}

}  // namespace amgcn
