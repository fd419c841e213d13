#include "amgcn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amgcn/error.hpp"

namespace amgcn {
namespace {

DenseMatrix glorot(std::size_t fan_out_rows, std::size_t fan_in_cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_out_rows + fan_in_cols));
  DenseMatrix m(fan_out_rows, fan_in_cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

std::vector<double> glorot_vector(std::size_t n, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(n + 1));
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return v;
}

void relu_inplace(DenseMatrix& m) {
  for (double& v : m.data()) v = std::max(v, 0.0);
}

DenseMatrix apply_dropout(const DenseMatrix& h, double rate, Rng& rng, LayerCache* cache) {
  DenseMatrix out = h;
  const double scale = 1.0 / (1.0 - rate);
  std::vector<std::uint8_t> keep(h.size());
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    keep[i] = rng.uniform() >= rate ? 1 : 0;
    data[i] = keep[i] != 0 ? data[i] * scale : 0.0;
  }
  if (cache != nullptr) {
    cache->keep = std::move(keep);
    cache->keep_scale = scale;
  }
  return out;
}

DenseMatrix dropout_layer_input(const DenseMatrix& h, double rate, bool training, Rng* rng,
                                LayerCache* cache) {
  if (!training || rate == 0.0) {
    if (cache != nullptr) {
      cache->keep.clear();
      cache->keep_scale = 1.0;
    }
    return h;
  }
  require(rng != nullptr, ErrorCode::ContractViolation,
          "channel_forward: training with dropout requires an rng");
  return apply_dropout(h, rate, *rng, cache);
}

}  // namespace

std::string_view channel_name(Channel c) noexcept {
  switch (c) {
    case Channel::Topology: return "topology";
    case Channel::Common: return "common";
    case Channel::Feature: return "feature";
  }
  return "?";
}

std::size_t ChannelMask::count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

ModelParams ModelParams::initialize(const ModelShape& shape, Rng& rng) {
  require(shape.input_dim > 0 && shape.nhid1 > 0 && shape.nhid2 > 0 && shape.num_classes > 0,
          ErrorCode::InvalidInput, "ModelParams: all dimensions must be positive");
  const std::size_t hp = shape.attn_hidden == 0 ? shape.nhid2 : shape.attn_hidden;
  ModelParams p;
  for (GcnChannelParams* ch : {&p.topo, &p.feat, &p.common}) {
    ch->w1 = glorot(shape.input_dim, shape.nhid1, rng);
    ch->w2 = glorot(shape.nhid1, shape.nhid2, rng);
  }
  const std::size_t slots = shape.attn_per_channel ? kNumChannels : 1;
  for (std::size_t s = 0; s < slots; ++s) {
    p.attn.w.push_back(glorot(hp, shape.nhid2, rng));
    p.attn.b.emplace_back(hp, 0.0);
  }
  p.attn.q = glorot_vector(hp, rng);
  p.clf.w = glorot(shape.num_classes, shape.nhid2, rng);
  p.clf.b.assign(shape.num_classes, 0.0);
  return p;
}

ModelParams ModelParams::zeros(const ModelShape& shape) {
  const std::size_t hp = shape.attn_hidden == 0 ? shape.nhid2 : shape.attn_hidden;
  ModelParams p;
  for (GcnChannelParams* ch : {&p.topo, &p.feat, &p.common}) {
    ch->w1 = DenseMatrix(shape.input_dim, shape.nhid1);
    ch->w2 = DenseMatrix(shape.nhid1, shape.nhid2);
  }
  const std::size_t slots = shape.attn_per_channel ? kNumChannels : 1;
  for (std::size_t s = 0; s < slots; ++s) {
    p.attn.w.emplace_back(hp, shape.nhid2);
    p.attn.b.emplace_back(hp, 0.0);
  }
  p.attn.q.assign(hp, 0.0);
  p.clf.w = DenseMatrix(shape.num_classes, shape.nhid2);
  p.clf.b.assign(shape.num_classes, 0.0);
  return p;
}

ModelParams ModelParams::zeros_like() const { return zeros(shape()); }

ModelShape ModelParams::shape() const {
  ModelShape s;
  s.input_dim = topo.w1.rows();
  s.nhid1 = topo.w1.cols();
  s.nhid2 = topo.w2.cols();
  s.attn_hidden = attn.q.size();
  s.num_classes = clf.w.rows();
  s.attn_per_channel = attn.per_channel();
  return s;
}

namespace {

template <typename View, typename Params>
std::vector<View> collect_tensors(Params& p) {
  std::vector<View> out;
  auto add_channel = [&](const char* prefix, auto& ch) {
    out.push_back({std::string(prefix) + ".w1", ch.w1.data(), TensorKind::ChannelWeight});
    out.push_back({std::string(prefix) + ".w2", ch.w2.data(), TensorKind::ChannelWeight});
  };
  add_channel("topology", p.topo);
  add_channel("feature", p.feat);
  add_channel("common", p.common);
  for (std::size_t s = 0; s < p.attn.w.size(); ++s) {
    const std::string suffix = p.attn.w.size() == 1 ? "" : "." + std::to_string(s);
    out.push_back({"attention.w" + suffix, p.attn.w[s].data(), TensorKind::Weight});
    out.push_back({"attention.b" + suffix, p.attn.b[s], TensorKind::Bias});
  }
  out.push_back({"attention.q", p.attn.q, TensorKind::Weight});
  out.push_back({"classifier.w", p.clf.w.data(), TensorKind::Weight});
  out.push_back({"classifier.b", p.clf.b, TensorKind::Bias});
  return out;
}

}  // namespace

std::vector<TensorView> ModelParams::tensors() { return collect_tensors<TensorView>(*this); }

std::vector<ConstTensorView> ModelParams::tensors() const {
  return collect_tensors<ConstTensorView>(*this);
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors()) {
    for (double v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

const DenseMatrix& ForwardState::embedding(Channel c) const {
  switch (c) {
    case Channel::Topology: return z_t;
    case Channel::Common: return z_c;
    case Channel::Feature: return z_f;
  }
  return z;
}

bool ForwardState::all_finite() const {
  for (const DenseMatrix* m : {&z_t, &z_f, &z_ct, &z_cf, &z_c, &z, &alpha, &logits, &probabilities}) {
    if (!m->all_finite()) return false;
  }
  return true;
}

DenseMatrix gcn_layer(const NormalizedAdjacency& adj, const DenseMatrix& h, const DenseMatrix& w,
                      bool activate, LayerCache* cache) {
  require(h.cols() == w.rows(), ErrorCode::DimensionMismatch,
          "gcn_layer: input width " + std::to_string(h.cols()) + " vs weight rows " +
              std::to_string(w.rows()));
  const bool transform_first = w.cols() < w.rows();
  DenseMatrix pre;
  if (transform_first) {
    pre = spmm(adj, matmul(h, w));
    if (cache != nullptr) cache->input = h;
  } else {
    DenseMatrix aggregated = spmm(adj, h);
    pre = matmul(aggregated, w);
    if (cache != nullptr) cache->aggregated = std::move(aggregated);
  }
  DenseMatrix out = pre;
  if (activate) relu_inplace(out);
  if (cache != nullptr) cache->pre_activation = std::move(pre);
  return out;
}

DenseMatrix channel_forward(const NormalizedAdjacency& adj, const DenseMatrix& x,
                            const GcnChannelParams& params, double dropout, bool training,
                            Rng* rng, ChannelCache* cache) {
  require(dropout >= 0.0 && dropout < 1.0, ErrorCode::InvalidInput,
          "channel_forward: dropout must lie in [0, 1)");
  LayerCache* first = cache != nullptr ? &cache->first : nullptr;
  LayerCache* second = cache != nullptr ? &cache->second : nullptr;
  const DenseMatrix h0 = dropout_layer_input(x, dropout, training, rng, first);
  const DenseMatrix h1 = gcn_layer(adj, h0, params.w1, true, first);
  const DenseMatrix h1d = dropout_layer_input(h1, dropout, training, rng, second);
  return gcn_layer(adj, h1d, params.w2, true, second);
}

CommonOutput common_forward(const NormalizedAdjacency& topology, const NormalizedAdjacency& feature,
                            const DenseMatrix& x, const GcnChannelParams& params, double dropout,
                            bool training, Rng* rng, ChannelCache* topology_cache,
                            ChannelCache* feature_cache) {
  CommonOutput out;
  out.z_ct = channel_forward(topology, x, params, dropout, training, rng, topology_cache);
  out.z_cf = channel_forward(feature, x, params, dropout, training, rng, feature_cache);
  out.z_c = out.z_ct;
  out.z_c += out.z_cf;
  out.z_c *= 0.5;
  return out;
}

FusionOutput attention_fuse(const DenseMatrix& z_t, const DenseMatrix& z_c, const DenseMatrix& z_f,
                            const AttentionParams& attn, const ChannelMask& channels,
                            AttentionCache* cache) {
  require(z_t.same_shape(z_c) && z_t.same_shape(z_f), ErrorCode::DimensionMismatch,
          "attention_fuse: embeddings must share one shape");
  require(channels.any(), ErrorCode::InvalidInput, "attention_fuse: no active channel");
  const std::size_t n = z_t.rows();
  const std::size_t h = z_t.cols();
  const std::size_t hp = attn.q.size();
  const std::array<const DenseMatrix*, kNumChannels> emb{&z_t, &z_c, &z_f};

  DenseMatrix scores(n, kNumChannels);
  std::array<DenseMatrix, kNumChannels> hidden;
  for (std::size_t e = 0; e < kNumChannels; ++e) {
    const Channel ch = static_cast<Channel>(e);
    if (!channels[ch]) continue;
    const DenseMatrix& w = attn.w[attn.slot(ch)];
    const std::vector<double>& b = attn.b[attn.slot(ch)];
    require(w.rows() == hp && w.cols() == h && b.size() == hp, ErrorCode::DimensionMismatch,
            "attention_fuse: attention parameters do not match embedding width");
    DenseMatrix t = matmul_nt(*emb[e], w);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = t.row(i);
      double omega = 0.0;
      for (std::size_t k = 0; k < hp; ++k) {
        row[k] = std::tanh(row[k] + b[k]);
        omega += attn.q[k] * row[k];
      }
      scores(i, e) = omega;
    }
    hidden[e] = std::move(t);
  }

  FusionOutput out{DenseMatrix(n, h), DenseMatrix(n, kNumChannels)};
  for (std::size_t i = 0; i < n; ++i) {
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < kNumChannels; ++e) {
      if (channels.active[e]) max_score = std::max(max_score, scores(i, e));
    }
    double denom = 0.0;
    for (std::size_t e = 0; e < kNumChannels; ++e) {
      if (!channels.active[e]) continue;
      out.alpha(i, e) = std::exp(scores(i, e) - max_score);
      denom += out.alpha(i, e);
    }
    auto zi = out.z.row(i);
    for (std::size_t e = 0; e < kNumChannels; ++e) {
      if (!channels.active[e]) continue;
      const double a = out.alpha(i, e) / denom;
      out.alpha(i, e) = a;
      const auto src = emb[e]->row(i);
      for (std::size_t c = 0; c < h; ++c) zi[c] += a * src[c];
    }
  }
  if (cache != nullptr) {
    cache->hidden = std::move(hidden);
    cache->scores = std::move(scores);
  }
  return out;
}

DenseMatrix softmax_rows(const DenseMatrix& logits) {
  DenseMatrix p = logits;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = p.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (double& v : row) {
      v = std::exp(v - m);
      denom += v;
    }
    for (double& v : row) v /= denom;
  }
  return p;
}

ClassifierOutput classify(const DenseMatrix& z, const ClassifierParams& clf) {
  require(z.cols() == clf.w.cols() && clf.b.size() == clf.w.rows(), ErrorCode::DimensionMismatch,
          "classify: embedding width " + std::to_string(z.cols()) + " vs classifier " +
              std::to_string(clf.w.rows()) + "x" + std::to_string(clf.w.cols()));
  ClassifierOutput out;
  out.logits = matmul_nt(z, clf.w);
  for (std::size_t i = 0; i < out.logits.rows(); ++i) {
    auto row = out.logits.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += clf.b[c];
  }
  out.probabilities = softmax_rows(out.logits);
  return out;
}

ForwardState full_forward(const GraphInputs& inputs, const ModelParams& params,
                          const ForwardOptions& options, Rng* rng) {
  const DenseMatrix& x = inputs.features;
  const std::size_t n = x.rows();
  require(inputs.topology.n == n && inputs.feature.n == n, ErrorCode::DimensionMismatch,
          "full_forward: graphs and features disagree on node count");
  const std::size_t h = params.topo.w2.cols();
  const bool keep = options.training;

  ForwardState s;
  s.has_cache = keep;
  s.channels = options.channels;

  auto cache_or_null = [&](ChannelCache& c) { return keep ? &c : nullptr; };

  if (options.channels[Channel::Topology]) {
    s.z_t = channel_forward(inputs.topology, x, params.topo, options.dropout, options.training, rng,
                            cache_or_null(s.topology_cache));
  } else {
    s.z_t = DenseMatrix(n, h);
  }
  if (options.channels[Channel::Common]) {
    CommonOutput common = common_forward(
        inputs.topology, inputs.feature, x, params.common, options.dropout, options.training, rng,
        cache_or_null(s.common_topology_cache), cache_or_null(s.common_feature_cache));
    s.z_ct = std::move(common.z_ct);
    s.z_cf = std::move(common.z_cf);
    s.z_c = std::move(common.z_c);
  } else {
    s.z_ct = DenseMatrix(n, h);
    s.z_cf = DenseMatrix(n, h);
    s.z_c = DenseMatrix(n, h);
  }
  if (options.channels[Channel::Feature]) {
    s.z_f = channel_forward(inputs.feature, x, params.feat, options.dropout, options.training, rng,
                            cache_or_null(s.feature_cache));
  } else {
    s.z_f = DenseMatrix(n, h);
  }

  FusionOutput fused = attention_fuse(s.z_t, s.z_c, s.z_f, params.attn, options.channels,
                                      keep ? &s.attention_cache : nullptr);
  s.z = std::move(fused.z);
  s.alpha = std::move(fused.alpha);

  ClassifierOutput cls = classify(s.z, params.clf);
  s.logits = std::move(cls.logits);
  s.probabilities = std::move(cls.probabilities);
  return s;
}

}  // namespace amgcn
