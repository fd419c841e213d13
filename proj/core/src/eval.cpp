#include "amgcn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "amgcn/config.hpp"
#include "amgcn/error.hpp"

namespace amgcn {
namespace {

std::size_t infer_classes(std::span<const int> pred, std::span<const int> truth) {
  int m = -1;
  for (int v : pred) m = std::max(m, v);
  for (int v : truth) m = std::max(m, v);
  return static_cast<std::size_t>(m + 1);
}

void check_inputs(std::span<const int> pred, std::span<const int> truth,
                  std::span<const std::size_t> idx) {
  require(!idx.empty(), ErrorCode::InvalidInput, "metrics: empty index set");
  for (std::size_t i : idx) {
    require(i < pred.size() && i < truth.size(), ErrorCode::IndexOutOfRange,
            "metrics: index " + std::to_string(i) + " out of range");
  }
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<int> predict(const DenseMatrix& probabilities) {
  std::vector<int> out(probabilities.rows());
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    const auto row = probabilities.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> idx) {
  check_inputs(pred, truth, idx);
  std::size_t correct = 0;
  for (std::size_t i : idx) correct += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

MetricsReport evaluate_predictions(std::span<const int> pred, std::span<const int> truth,
                                   std::span<const std::size_t> idx, std::size_t num_classes) {
  check_inputs(pred, truth, idx);
  const std::size_t classes = num_classes == 0 ? infer_classes(pred, truth) : num_classes;
  std::vector<std::size_t> tp(classes, 0);
  std::vector<std::size_t> predicted(classes, 0);
  std::vector<std::size_t> actual(classes, 0);
  for (std::size_t i : idx) {
    const auto p = static_cast<std::size_t>(pred[i]);
    const auto t = static_cast<std::size_t>(truth[i]);
    require(p < classes && t < classes, ErrorCode::IndexOutOfRange,
            "metrics: class id outside [0, " + std::to_string(classes) + ")");
    ++predicted[p];
    ++actual[t];
    if (p == t) ++tp[t];
  }

  MetricsReport report;
  report.accuracy = accuracy(pred, truth, idx);
  report.per_class.resize(classes);
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    ClassMetrics& m = report.per_class[c];
    m.support = actual[c];
    m.precision = predicted[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / predicted[c];
    m.recall = actual[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / actual[c];
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    f1_sum += m.f1;
  }
  report.macro_f1 = classes == 0 ? 0.0 : f1_sum / static_cast<double>(classes);
  return report;
}

double macro_f1(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> idx, std::size_t num_classes) {
  return evaluate_predictions(pred, truth, idx, num_classes).macro_f1;
}

std::string AttentionReport::verdict() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "largest mean attention: %s (topology %.4f, common %.4f, feature %.4f)",
                std::string(channel_name(dominant)).c_str(), mean[0], mean[1], mean[2]);
  return buf;
}

AttentionReport attention_report(const TrainHistory& history, const ForwardState& final_state) {
  AttentionReport r;
  r.alpha = final_state.alpha;
  const std::size_t n = r.alpha.rows();
  if (n > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t e = 0; e < kNumChannels; ++e) r.mean[e] += r.alpha(i, e);
    }
    for (double& m : r.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t e = 0; e < kNumChannels; ++e) {
        const double d = r.alpha(i, e) - r.mean[e];
        r.stddev[e] += d * d;
      }
    }
    for (double& s : r.stddev) s = std::sqrt(s / static_cast<double>(n));
  }
  r.trend.reserve(history.epochs.size());
  for (const auto& rec : history.epochs) r.trend.push_back(rec.mean_alpha);
  r.dominant = static_cast<Channel>(std::max_element(r.mean.begin(), r.mean.end()) - r.mean.begin());
  return r;
}

void write_attention_csv(const AttentionReport& report, const std::filesystem::path& file) {
  auto out = open_output(file);
  out << "node,alpha_topology,alpha_common,alpha_feature\n";
  for (std::size_t i = 0; i < report.alpha.rows(); ++i) {
    out << i;
    for (std::size_t e = 0; e < kNumChannels; ++e) out << ',' << fmt(report.alpha(i, e));
    out << '\n';
  }
}

void write_attention_trend_csv(const AttentionReport& report, const std::filesystem::path& file) {
  auto out = open_output(file);
  out << "epoch,mean_alpha_topology,mean_alpha_common,mean_alpha_feature\n";
  for (std::size_t e = 0; e < report.trend.size(); ++e) {
    out << e;
    for (double v : report.trend[e]) out << ',' << fmt(v);
    out << '\n';
  }
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& file) {
  auto out = open_output(file);
  out << "epoch,loss_total,loss_task,loss_consistency,loss_disparity,train_acc,test_acc,"
         "mean_alpha_topology,mean_alpha_common,mean_alpha_feature\n";
  for (const auto& r : history.epochs) {
    out << r.epoch << ',' << fmt(r.loss.total) << ',' << fmt(r.loss.task) << ','
        << fmt(r.loss.consistency) << ',' << fmt(r.loss.disparity) << ',' << fmt(r.train_accuracy)
        << ',' << fmt(r.test_accuracy);
    for (double a : r.mean_alpha) out << ',' << fmt(a);
    out << '\n';
  }
}

void export_embeddings(const ForwardState& state, std::span<const int> labels,
                       const std::filesystem::path& file, bool include_channels) {
  const std::size_t n = state.z.rows();
  require(labels.size() == n, ErrorCode::DimensionMismatch,
          "export_embeddings: label count differs from embedding rows");
  std::vector<std::pair<std::string, const DenseMatrix*>> blocks{{"z_", &state.z}};
  if (include_channels) {
    blocks.emplace_back("zt_", &state.z_t);
    blocks.emplace_back("zc_", &state.z_c);
    blocks.emplace_back("zf_", &state.z_f);
  }
  auto out = open_output(file);
  out << "node,label";
  for (const auto& [prefix, m] : blocks) {
    for (std::size_t c = 0; c < m->cols(); ++c) out << ',' << prefix << c;
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << i << ',' << labels[i];
    for (const auto& [prefix, m] : blocks) {
      for (double v : m->row(i)) out << ',' << fmt(v);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + file.string());
}

std::string metrics_json(const MetricsReport& train, const MetricsReport& test,
                         const AttentionReport& attention, const TrainHistory& history,
                         const TrainConfig& config) {
  nlohmann::ordered_json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["variant"] = std::string(to_string(config.variant));
  j["seed"] = config.seed;
  j["train_accuracy"] = train.accuracy;
  j["train_macro_f1"] = train.macro_f1;
  j["test_accuracy"] = test.accuracy;
  j["test_macro_f1"] = test.macro_f1;
  auto per_class = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < test.per_class.size(); ++c) {
    const auto& m = test.per_class[c];
    per_class.push_back({{"class", c},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  j["test_per_class"] = std::move(per_class);
  j["mean_attention"] = {{"topology", attention.mean[0]},
                         {"common", attention.mean[1]},
                         {"feature", attention.mean[2]}};
  j["dominant_channel"] = std::string(channel_name(attention.dominant));
  if (!history.epochs.empty()) {
    const auto& last = history.epochs.back().loss;
    j["final_loss"] = {{"total", last.total},
                       {"task", last.task},
                       {"consistency", last.consistency},
                       {"disparity", last.disparity}};
  }
  j["epochs"] = history.epochs.size();
  return j.dump(2);
}

}  // namespace amgcn
