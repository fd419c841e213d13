#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amgcn/graph.hpp"
#include "amgcn/losses.hpp"
#include "amgcn/model.hpp"

namespace amgcn {

// full: L_t + gamma L_c + beta L_d; wo: neither constraint; c: consistency
// only (beta = 0); d: disparity only (gamma = 0).
enum class Variant { Full, WithoutConstraints, ConsistencyOnly, DisparityOnly };

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view text);

SimilarityMetric parse_metric(std::string_view text, double heat_t = 2.0);
std::string_view to_string(SimilarityKind kind) noexcept;

ChannelMask parse_channels(std::string_view text);  // "all", "topology", "feature" or e.g. "t,f"
std::string format_channels(const ChannelMask& mask);

struct TrainConfig {
  std::size_t nhid1 = 64;
  std::size_t nhid2 = 16;
  std::size_t attn_hidden = 0;  // 0 -> nhid2
  double dropout = 0.5;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  std::size_t k = 7;
  SimilarityMetric metric = SimilarityMetric::cosine();
  double gamma = 0.001;
  double beta = 1e-8;
  std::uint64_t seed = 1;
  Variant variant = Variant::Full;
  bool ce_mean = false;
  bool attn_per_channel = false;
  bool decay_channel_weights_only = false;  // false: every weight tensor decays
  ChannelMask channels;
  // Split construction when the dataset carries none.
  std::size_t labels_per_class = 20;
  std::size_t test_size = 1000;

  // gamma/beta after the variant zeroes its terms.
  LossWeights loss_weights() const;
  ModelShape model_shape(std::size_t input_dim, std::size_t num_classes) const;

  // Throws InvalidInput on out-of-range values.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Settings used for the two synthetic case studies.
TrainConfig synthetic_defaults();

struct Preset {
  std::string dataset;
  std::size_t labels_per_class;
  TrainConfig config;
};

// Published per-dataset hyperparameters for the six real datasets at 20, 40
// and 60 labels per class.
const std::vector<Preset>& published_presets();

// Lookup by "<dataset>-<L/C>", e.g. "acm-20"; case-insensitive dataset name.
// "synthetic" returns synthetic_defaults().
std::optional<TrainConfig> find_preset(std::string_view name);

// Applies key=value overrides onto `config`. Keys mirror TrainConfig field
// names; `epoch_max` is accepted for `epochs`, `weight-decay` for
// `weight_decay`. Unknown keys throw InvalidInput.
void apply_setting(TrainConfig& config, std::string_view key, std::string_view value);

// Accepts either a JSON object or flat key=value lines ('#' comments).
TrainConfig parse_config_text(std::string_view text, TrainConfig base = synthetic_defaults());
TrainConfig load_config_file(const std::filesystem::path& file,
                             TrainConfig base = synthetic_defaults());

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(std::string_view json);

}  // namespace amgcn
