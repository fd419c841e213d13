#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "amgcn/dense.hpp"
#include "amgcn/model.hpp"
#include "amgcn/training.hpp"

namespace amgcn {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // true members of the class within idx
};

// Classes with no true and no predicted member score F1 = 0, and an undefined
// precision or recall counts as 0.
struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
};

std::vector<int> predict(const DenseMatrix& probabilities);

// All three throw InvalidInput for an empty idx. num_classes == 0 infers
// max(label) + 1 over both vectors.
double accuracy(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> idx);
double macro_f1(std::span<const int> pred, std::span<const int> truth,
                std::span<const std::size_t> idx, std::size_t num_classes = 0);
MetricsReport evaluate_predictions(std::span<const int> pred, std::span<const int> truth,
                                   std::span<const std::size_t> idx, std::size_t num_classes = 0);

struct AttentionReport {
  DenseMatrix alpha;  // n x 3 at convergence
  std::array<double, kNumChannels> mean{};
  std::array<double, kNumChannels> stddev{};
  std::vector<std::array<double, kNumChannels>> trend;  // per-epoch means
  Channel dominant = Channel::Topology;

  std::string verdict() const;
};

AttentionReport attention_report(const TrainHistory& history, const ForwardState& final_state);

// CSV schema v1: "node,alpha_topology,alpha_common,alpha_feature".
void write_attention_csv(const AttentionReport& report, const std::filesystem::path& file);
// CSV schema v1: "epoch,mean_alpha_topology,mean_alpha_common,mean_alpha_feature".
void write_attention_trend_csv(const AttentionReport& report, const std::filesystem::path& file);

// CSV schema v1: "epoch,loss_total,loss_task,loss_consistency,loss_disparity,
// train_acc,test_acc,mean_alpha_topology,mean_alpha_common,mean_alpha_feature".
void write_history_csv(const TrainHistory& history, const std::filesystem::path& file);

// Header "node,label,z_0..z_{h-1}" and, with include_channels, the same
// columns for Z_T, Z_C and Z_F prefixed zt_, zc_, zf_. One row per node.
void export_embeddings(const ForwardState& state, std::span<const int> labels,
                       const std::filesystem::path& file, bool include_channels = false);

inline constexpr int kMetricsSchemaVersion = 1;

// metrics.json body: schema version, train/test accuracy and macro-F1,
// per-class test scores, mean attention and the final loss breakdown.
std::string metrics_json(const MetricsReport& train, const MetricsReport& test,
                         const AttentionReport& attention, const TrainHistory& history,
                         const TrainConfig& config);

}  // namespace amgcn
