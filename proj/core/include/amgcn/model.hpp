#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amgcn/dense.hpp"
#include "amgcn/graph.hpp"
#include "amgcn/rng.hpp"

namespace amgcn {

// Column order of the attention matrix and of every per-channel array.
enum class Channel : std::size_t { Topology = 0, Common = 1, Feature = 2 };
inline constexpr std::size_t kNumChannels = 3;

constexpr std::size_t index_of(Channel c) noexcept { return static_cast<std::size_t>(c); }
std::string_view channel_name(Channel c) noexcept;

// Which embeddings take part in fusion. A masked channel is not computed, its
// embedding is zero and its attention weight is exactly 0.
struct ChannelMask {
  std::array<bool, kNumChannels> active{true, true, true};

  static ChannelMask all() { return {}; }
  static ChannelMask topology_only() { return {{true, false, false}}; }
  static ChannelMask feature_only() { return {{false, false, true}}; }

  bool operator[](Channel c) const { return active[index_of(c)]; }
  std::size_t count() const;
  bool any() const { return count() > 0; }

  friend bool operator==(const ChannelMask&, const ChannelMask&) = default;
};

struct GcnChannelParams {
  DenseMatrix w1;  // d x nhid1
  DenseMatrix w2;  // nhid1 x nhid2

  friend bool operator==(const GcnChannelParams&, const GcnChannelParams&) = default;
};

struct AttentionParams {
  // A single (W, b) shared by all three embeddings, or three pairs in channel
  // order when per-channel attention is enabled. q is always shared.
  std::vector<DenseMatrix> w;          // each h' x h
  std::vector<std::vector<double>> b;  // each h'
  std::vector<double> q;               // h'

  bool per_channel() const { return w.size() == kNumChannels; }
  std::size_t slot(Channel c) const { return per_channel() ? index_of(c) : 0; }

  friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

struct ClassifierParams {
  DenseMatrix w;          // C x h
  std::vector<double> b;  // C

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

struct ModelShape {
  std::size_t input_dim = 0;
  std::size_t nhid1 = 0;
  std::size_t nhid2 = 0;
  std::size_t attn_hidden = 0;  // 0 -> nhid2
  std::size_t num_classes = 0;
  bool attn_per_channel = false;
};

enum class TensorKind { ChannelWeight, Weight, Bias };

struct TensorView {
  std::string name;
  std::span<double> values;
  TensorKind kind;
};

struct ConstTensorView {
  std::string name;
  std::span<const double> values;
  TensorKind kind;
};

struct ModelParams {
  GcnChannelParams topo;
  GcnChannelParams feat;
  GcnChannelParams common;  // applied to both graphs
  AttentionParams attn;
  ClassifierParams clf;

  // Glorot-uniform weights, zero biases.
  static ModelParams initialize(const ModelShape& shape, Rng& rng);
  static ModelParams zeros(const ModelShape& shape);
  ModelParams zeros_like() const;

  ModelShape shape() const;

  // Fixed enumeration order; names are stable and used in checkpoints.
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;

  bool all_finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Gradients mirror the parameter layout exactly.
using Gradients = ModelParams;

struct GraphInputs {
  NormalizedAdjacency topology;
  NormalizedAdjacency feature;
  DenseMatrix features;
};

struct LayerCache {
  std::vector<std::uint8_t> keep;  // dropout mask on the layer input; empty = none
  double keep_scale = 1.0;
  // N (H W) is evaluated in whichever order multiplies N by fewer columns.
  // Exactly one of the two is kept: N * dropout(H) when aggregating first,
  // dropout(H) itself when transforming first.
  DenseMatrix aggregated;
  DenseMatrix input;
  DenseMatrix pre_activation;  // N dropout(H) W
};

struct ChannelCache {
  LayerCache first;
  LayerCache second;
};

struct AttentionCache {
  std::array<DenseMatrix, kNumChannels> hidden;  // tanh(z W^T + b), n x h'
  DenseMatrix scores;                            // omega, n x 3
};

struct ForwardState {
  bool has_cache = false;
  ChannelMask channels;

  DenseMatrix z_t;
  DenseMatrix z_f;
  DenseMatrix z_ct;
  DenseMatrix z_cf;
  DenseMatrix z_c;
  DenseMatrix z;
  DenseMatrix alpha;  // n x 3, columns T, C, F
  DenseMatrix logits;
  DenseMatrix probabilities;

  ChannelCache topology_cache;
  ChannelCache common_topology_cache;
  ChannelCache common_feature_cache;
  ChannelCache feature_cache;
  AttentionCache attention_cache;

  const DenseMatrix& embedding(Channel c) const;
  bool all_finite() const;
};

// ReLU(N H W) when activate, else N H W. The sparse product runs on the
// narrower of H and H W.
DenseMatrix gcn_layer(const NormalizedAdjacency& adj, const DenseMatrix& h, const DenseMatrix& w,
                      bool activate, LayerCache* cache = nullptr);

// Two stacked ReLU GCN layers with inverted dropout on each layer input while
// training. rng is required when training with dropout > 0.
DenseMatrix channel_forward(const NormalizedAdjacency& adj, const DenseMatrix& x,
                            const GcnChannelParams& params, double dropout, bool training,
                            Rng* rng, ChannelCache* cache = nullptr);

struct CommonOutput {
  DenseMatrix z_ct;
  DenseMatrix z_cf;
  DenseMatrix z_c;  // (z_ct + z_cf) / 2
};

// Same weights on both graphs; dropout masks are drawn independently per branch
// (topology branch first).
CommonOutput common_forward(const NormalizedAdjacency& topology, const NormalizedAdjacency& feature,
                            const DenseMatrix& x, const GcnChannelParams& params, double dropout,
                            bool training, Rng* rng, ChannelCache* topology_cache = nullptr,
                            ChannelCache* feature_cache = nullptr);

struct FusionOutput {
  DenseMatrix z;
  DenseMatrix alpha;
};

// Per node: omega_e = q . tanh(W z_e + b), alpha = softmax over the active
// channels, z = sum_e alpha_e z_e.
FusionOutput attention_fuse(const DenseMatrix& z_t, const DenseMatrix& z_c, const DenseMatrix& z_f,
                            const AttentionParams& attn,
                            const ChannelMask& channels = ChannelMask::all(),
                            AttentionCache* cache = nullptr);

struct ClassifierOutput {
  DenseMatrix logits;
  DenseMatrix probabilities;
};

ClassifierOutput classify(const DenseMatrix& z, const ClassifierParams& clf);

// Row-wise softmax with max subtraction.
DenseMatrix softmax_rows(const DenseMatrix& logits);

struct ForwardOptions {
  bool training = false;
  double dropout = 0.0;
  ChannelMask channels;
};

// Dropout draws consume rng in branch order topology, common-topology,
// common-feature, feature; first layer before second within each branch.
// Caches for backward are kept iff options.training.
ForwardState full_forward(const GraphInputs& inputs, const ModelParams& params,
                          const ForwardOptions& options, Rng* rng = nullptr);

}  // namespace amgcn
