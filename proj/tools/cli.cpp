#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "amgcn/checkpoint.hpp"
#include "amgcn/config.hpp"
#include "amgcn/data.hpp"
#include "amgcn/error.hpp"
#include "amgcn/eval.hpp"
#include "amgcn/training.hpp"

namespace amgcn::cli {
namespace fs = std::filesystem;
namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::DimensionMismatch:
      return kInvalidConfig;
    case ErrorCode::MissingFile:
    case ErrorCode::Io:
      return kMissingFile;
    case ErrorCode::RaggedFeatures:
    case ErrorCode::LabelGap:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::ParseError:
    case ErrorCode::InsufficientNodes:
      return kBadData;
    case ErrorCode::NumericalFailure:
      return kNumericalFailure;
    case ErrorCode::ContractViolation:
      return kUnexpected;
  }
  return kUnexpected;
}

std::uint64_t env_seed(std::uint64_t fallback) {
  const char* raw = std::getenv("AMGCN_SEED");
  if (raw == nullptr || *raw == '\0') return fallback;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidInput, std::string("AMGCN_SEED is not an integer: ") + raw);
  }
}

// Flags shared by every command that builds a TrainConfig. Precedence, lowest
// first: built-in defaults or --preset, AMGCN_SEED, --config file, flags.
struct ConfigFlags {
  std::string config_file;
  std::string preset;
  std::string variant;
  std::string channels;
  std::vector<std::string> settings;
  std::uint64_t seed = 0;
  bool ce_mean = false;
  bool attn_per_channel = false;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "Config file (JSON object or key=value lines)");
    cmd.add_option("--preset", preset, "Start from a named preset, e.g. acm-20 or synthetic");
    cmd.add_option("--variant", variant, "full | wo | c | d");
    cmd.add_option("--channels", channels, "all | topology | feature | comma list of t,c,f");
    cmd.add_option("--set", settings, "Override one config key, key=value (repeatable)");
    seed_opt = cmd.add_option("--seed", seed, "Random seed (falls back to AMGCN_SEED)");
    cmd.add_flag("--ce-mean", ce_mean, "Average the cross-entropy over training nodes");
    cmd.add_flag("--attn-per-channel", attn_per_channel, "Separate attention W, b per channel");
  }

  TrainConfig resolve() const {
    TrainConfig config = synthetic_defaults();
    if (!preset.empty()) {
      auto found = find_preset(preset);
      require(found.has_value(), ErrorCode::InvalidInput, "unknown preset '" + preset + "'");
      config = *found;
    }
    config.seed = env_seed(config.seed);
    if (!config_file.empty()) config = load_config_file(config_file, config);
    if (!variant.empty()) config.variant = parse_variant(variant);
    if (!channels.empty()) config.channels = parse_channels(channels);
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      require(eq != std::string::npos, ErrorCode::InvalidInput, "--set expects key=value, got '" + s + "'");
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed_opt != nullptr && seed_opt->count() > 0) config.seed = seed;
    if (ce_mean) config.ce_mean = true;
    if (attn_per_channel) config.attn_per_channel = true;
    config.validate();
    return config;
  }
};

LabeledDataset with_split(LabeledDataset ds, const TrainConfig& config) {
  if (ds.split.train.empty()) {
    ds.split = make_split(ds.labels, config.labels_per_class, config.test_size, config.seed);
  }
  return ds;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

int cmd_generate(const std::string& which, std::uint64_t seed, bool seed_given,
                 const std::string& out_dir, std::ostream& out) {
  const std::uint64_t s = seed_given ? seed : env_seed(1);
  LabeledDataset ds;
  if (which == "case1") {
    ds = generate_case1(s);
  } else if (which == "case2") {
    ds = generate_case2(s);
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown synthetic case '" + which + "' (case1|case2)");
  }
  save_dataset(ds, out_dir);
  out << "wrote " << which << " (seed " << s << ", " << ds.num_nodes() << " nodes, "
      << ds.graph.num_undirected_edges() << " edges) to " << out_dir << '\n';
  return kOk;
}

int cmd_train(const std::string& data_dir, const ConfigFlags& flags, const std::string& out_dir,
              std::ostream& out, std::ostream& err) {
  const TrainConfig config = flags.resolve();
  LoadReport load;
  const LabeledDataset ds = with_split(load_dataset(data_dir, &load), config);
  if (load.self_loops_dropped > 0) {
    err << "warning: dropped " << load.self_loops_dropped << " self-loop(s)\n";
  }
  const auto start = std::chrono::steady_clock::now();
  const TrainResult result = train(ds, config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ensure_dir(out_dir);
  const fs::path dir(out_dir);
  save_checkpoint({config, result.params}, dir / "checkpoint.json");
  const auto pred = predict(result.final_state.probabilities);
  const auto train_metrics = evaluate_predictions(pred, ds.labels, ds.split.train, ds.num_classes());
  const auto test_metrics = evaluate_predictions(pred, ds.labels, ds.split.test, ds.num_classes());
  const AttentionReport attention = attention_report(result.history, result.final_state);
  {
    std::ofstream f(dir / "metrics.json");
    if (!f) throw Error(ErrorCode::Io, "cannot write metrics.json");
    f << metrics_json(train_metrics, test_metrics, attention, result.history, config) << '\n';
  }
  write_history_csv(result.history, dir / "history.csv");
  write_attention_csv(attention, dir / "attention.csv");
  write_attention_trend_csv(attention, dir / "attention_trend.csv");
  export_embeddings(result.final_state, ds.labels, dir / "embeddings.csv", true);

  out << std::fixed << std::setprecision(4) << "variant " << to_string(config.variant)
      << "  seed " << config.seed << "  epochs " << config.epochs << "  (" << std::setprecision(1)
      << seconds << " s)\n"
      << std::setprecision(4) << "test accuracy " << test_metrics.accuracy << "  macro-F1 "
      << test_metrics.macro_f1 << '\n'
      << attention.verdict() << '\n';
  return kOk;
}

int cmd_eval(const std::string& checkpoint_file, const std::string& data_dir, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_file);
  const LabeledDataset ds = with_split(load_dataset(data_dir), ckpt.config);
  require(ds.num_features() == ckpt.params.shape().input_dim, ErrorCode::DimensionMismatch,
          "eval: dataset feature width differs from the checkpoint");
  require(ds.num_classes() == ckpt.params.shape().num_classes, ErrorCode::DimensionMismatch,
          "eval: dataset class count differs from the checkpoint");
  const GraphInputs inputs = prepare_inputs(ds, ckpt.config);
  ForwardOptions eval_mode;
  eval_mode.channels = ckpt.config.channels;
  const ForwardState state = full_forward(inputs, ckpt.params, eval_mode);
  const auto pred = predict(state.probabilities);
  const auto train_metrics = evaluate_predictions(pred, ds.labels, ds.split.train, ds.num_classes());
  const auto test_metrics = evaluate_predictions(pred, ds.labels, ds.split.test, ds.num_classes());
  out << metrics_json(train_metrics, test_metrics, attention_report({}, state), {}, ckpt.config)
      << '\n';
  return kOk;
}

int cmd_gradcheck(const ConfigFlags& flags, const std::vector<std::uint64_t>& seeds,
                  double tolerance, double epsilon, const std::string& tamper, std::ostream& out) {
  TrainConfig config = flags.resolve();
  config.dropout = 0.0;
  std::vector<std::uint64_t> run_seeds = seeds;
  if (run_seeds.empty()) run_seeds.push_back(config.seed);

  GradCheckOptions options;
  options.tolerance = tolerance;
  options.epsilon = epsilon;
  bool all_pass = true;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed : run_seeds) {
    const GradCheckProblem problem = make_gradcheck_problem(seed, config);
    const ObjectiveOptions objective{config.loss_weights(), config.ce_mean};
    std::function<void(Gradients&)> fault;
    if (!tamper.empty()) {
      fault = [&](Gradients& g) {
        for (auto& t : g.tensors()) {
          if (t.name == tamper && !t.values.empty()) t.values[0] += 1.0;
        }
      };
    }
    const GradCheckReport report = check_gradients(problem, objective, options, fault);
    out << "seed " << seed << '\n';
    for (const auto& t : report.tensors) {
      out << "  " << std::left << std::setw(16) << t.name << std::right << std::setw(6) << t.entries
          << "  max_rel " << std::scientific << std::setprecision(3) << t.max_rel_error
          << "  max_abs " << t.max_abs_error << "  " << (t.pass ? "PASS" : "FAIL") << '\n'
          << std::defaultfloat;
    }
    all_pass = all_pass && report.all_pass();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << (all_pass ? "gradcheck: all tensors pass" : "gradcheck: FAILED") << " (tolerance "
      << tolerance << ", " << std::fixed << std::setprecision(2) << seconds << " s)\n"
      << std::defaultfloat;
  return all_pass ? kOk : kGradCheckFailed;
}

int cmd_knn(const std::string& data_dir, std::size_t k, const std::string& metric, double heat_t,
            const std::string& out_file, std::ostream& out) {
  const LabeledDataset ds = load_dataset(data_dir);
  const SparseGraph g = build_knn_graph(ds.features, k, parse_metric(metric, heat_t));
  write_edges(g, out_file);
  out << "wrote " << g.num_undirected_edges() << " edges (k=" << k << ", " << metric << ") to "
      << out_file << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-fused multi-channel GCN: training, evaluation and diagnostics"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a synthetic case-study dataset");
  std::string gen_case;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("case", gen_case, "case1 | case2")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Random seed (falls back to AMGCN_SEED)");
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train on a dataset directory");
  std::string tr_data;
  std::string tr_out;
  ConfigFlags tr_flags;
  tr->add_option("--data", tr_data, "Dataset directory")->required();
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr_flags.attach(*tr);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset directory");
  std::string ev_ckpt;
  std::string ev_data;
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint.json written by train")->required();
  ev->add_option("--data", ev_data, "Dataset directory")->required();

  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  ConfigFlags gc_flags;
  std::vector<std::uint64_t> gc_seeds;
  double gc_tol = 1e-4;
  double gc_eps = 1e-5;
  std::string gc_tamper;
  gc_flags.attach(*gc);
  gc->add_option("--seeds", gc_seeds, "Problem seeds (default: the config seed)")->delimiter(',');
  gc->add_option("--tolerance", gc_tol, "Maximum relative error per tensor");
  gc->add_option("--epsilon", gc_eps, "Central-difference step");
  gc->add_option("--inject-fault", gc_tamper, "Corrupt one tensor's analytic gradient (self-test)");

  auto* kn = app.add_subcommand("knn-graph", "Build the kNN feature graph of a dataset");
  std::string kn_data;
  std::string kn_out;
  std::string kn_metric = "cosine";
  std::size_t kn_k = 0;
  double kn_t = 2.0;
  kn->add_option("--data", kn_data, "Dataset directory")->required();
  kn->add_option("--k", kn_k, "Neighbors per node")->required();
  kn->add_option("--metric", kn_metric, "cosine | heat");
  kn->add_option("--heat-t", kn_t, "Heat-kernel time parameter");
  kn->add_option("--out", kn_out, "Output edge list (edges.tsv format)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_case, gen_seed, gen_seed_opt->count() > 0, gen_out, out);
    if (*tr) return cmd_train(tr_data, tr_flags, tr_out, out, err);
    if (*ev) return cmd_eval(ev_ckpt, ev_data, out);
    if (*gc) return cmd_gradcheck(gc_flags, gc_seeds, gc_tol, gc_eps, gc_tamper, out);
    if (*kn) return cmd_knn(kn_data, kn_k, kn_metric, kn_t, kn_out, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kUsage;
}

}  // namespace amgcn::cli
