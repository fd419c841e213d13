#include "amgcn/training.hpp"

#include "amgcn/error.hpp"

namespace amgcn {
namespace {

bool has_pair(const ChannelMask& m, Channel specific) {
  return m[specific] && m[Channel::Common];
}

void relu_mask_inplace(DenseMatrix& g, const DenseMatrix& pre) {
  auto gd = g.data();
  const auto pd = pre.data();
  for (std::size_t i = 0; i < gd.size(); ++i) {
    if (pd[i] <= 0.0) gd[i] = 0.0;
  }
}

std::vector<double> column_sums(const DenseMatrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
  return out;
}

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Returns dL/dZ_e for e in T, C, F (zero for masked channels) and accumulates
// the attention parameter gradients.
std::array<DenseMatrix, kNumChannels> attention_backward(const ForwardState& s,
                                                         const AttentionParams& attn,
                                                         const DenseMatrix& g_z,
                                                         AttentionParams& grad) {
  const std::size_t n = g_z.rows();
  const std::size_t h = g_z.cols();
  const std::size_t hp = attn.q.size();
  const std::array<const DenseMatrix*, kNumChannels> emb{&s.z_t, &s.z_c, &s.z_f};

  DenseMatrix g_alpha(n, kNumChannels);
  for (std::size_t e = 0; e < kNumChannels; ++e) {
    if (!s.channels.active[e]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const auto zi = emb[e]->row(i);
      const auto gi = g_z.row(i);
      double dot = 0.0;
      for (std::size_t c = 0; c < h; ++c) dot += gi[c] * zi[c];
      g_alpha(i, e) = dot;
    }
  }

  // Softmax Jacobian: d omega_e = alpha_e (g_alpha_e - sum_k alpha_k g_alpha_k).
  DenseMatrix g_omega(n, kNumChannels);
  for (std::size_t i = 0; i < n; ++i) {
    double weighted = 0.0;
    for (std::size_t e = 0; e < kNumChannels; ++e) weighted += s.alpha(i, e) * g_alpha(i, e);
    for (std::size_t e = 0; e < kNumChannels; ++e) {
      g_omega(i, e) = s.alpha(i, e) * (g_alpha(i, e) - weighted);
    }
  }

  std::array<DenseMatrix, kNumChannels> g_emb;
  for (std::size_t e = 0; e < kNumChannels; ++e) {
    g_emb[e] = DenseMatrix(n, h);
    const Channel ch = static_cast<Channel>(e);
    if (!s.channels[ch]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = s.alpha(i, e);
      const auto gi = g_z.row(i);
      auto out = g_emb[e].row(i);
      for (std::size_t c = 0; c < h; ++c) out[c] = a * gi[c];
    }

    const DenseMatrix& hidden = s.attention_cache.hidden[e];
    DenseMatrix g_pre(n, hp);
    for (std::size_t i = 0; i < n; ++i) {
      const double go = g_omega(i, e);
      const auto t = hidden.row(i);
      auto gp = g_pre.row(i);
      for (std::size_t k = 0; k < hp; ++k) {
        grad.q[k] += go * t[k];
        gp[k] = go * attn.q[k] * (1.0 - t[k] * t[k]);
      }
    }
    const std::size_t slot = attn.slot(ch);
    grad.w[slot] += matmul_tn(g_pre, *emb[e]);
    add_into(grad.b[slot], column_sums(g_pre));
    g_emb[e] += matmul(g_pre, attn.w[slot]);
  }
  return g_emb;
}

}  // namespace

LossBreakdown evaluate_objective(const ForwardState& state, const Supervision& sup,
                                 const ObjectiveOptions& options) {
  const double task = cross_entropy(state.probabilities, sup.labels, sup.train_idx, options.ce_mean);
  double consistency = 0.0;
  double disparity = 0.0;
  if (state.channels[Channel::Common]) {
    consistency = consistency_loss(state.z_ct, state.z_cf);
    if (has_pair(state.channels, Channel::Topology)) disparity += hsic(state.z_t, state.z_ct);
    if (has_pair(state.channels, Channel::Feature)) disparity += hsic(state.z_f, state.z_cf);
  }
  return total_loss(task, consistency, disparity, options.weights);
}

namespace {

// Given g = dL/d(N H W), accumulates dL/dW into `grad_w` and returns dL/dH
// when `need_input_grad`. N is symmetric, so N^T g = N g, and the sparse
// product runs on the same side as in the forward pass.
DenseMatrix layer_backward(const NormalizedAdjacency& adj, const LayerCache& cache,
                           const DenseMatrix& w, const DenseMatrix& g, DenseMatrix& grad_w,
                           bool need_input_grad) {
  if (!cache.aggregated.empty()) {
    grad_w += matmul_tn(cache.aggregated, g);
    return need_input_grad ? spmm(adj, matmul_nt(g, w)) : DenseMatrix();
  }
  const DenseMatrix ng = spmm(adj, g);
  grad_w += matmul_tn(cache.input, ng);
  return need_input_grad ? matmul_nt(ng, w) : DenseMatrix();
}

}  // namespace

void channel_backward(const NormalizedAdjacency& adj, const ChannelCache& cache,
                      const GcnChannelParams& params, const DenseMatrix& upstream,
                      GcnChannelParams& grad) {
  const LayerCache& second = cache.second;
  const LayerCache& first = cache.first;
  require(!second.pre_activation.empty() && !first.pre_activation.empty(),
          ErrorCode::ContractViolation, "channel_backward: forward caches missing");

  DenseMatrix g_pre2 = upstream;
  relu_mask_inplace(g_pre2, second.pre_activation);
  DenseMatrix g_h1 = layer_backward(adj, second, params.w2, g_pre2, grad.w2, true);
  if (!second.keep.empty()) {
    auto gd = g_h1.data();
    for (std::size_t i = 0; i < gd.size(); ++i) {
      gd[i] = second.keep[i] != 0 ? gd[i] * second.keep_scale : 0.0;
    }
  }
  relu_mask_inplace(g_h1, first.pre_activation);
  (void)layer_backward(adj, first, params.w1, g_h1, grad.w1, false);
}

Gradients backward(const ForwardState& s, const GraphInputs& inputs, const ModelParams& params,
                   const Supervision& sup, const ObjectiveOptions& options,
                   const BackwardOptions& branches) {
  require(s.has_cache, ErrorCode::ContractViolation,
          "backward: forward state was produced without training caches");
  Gradients g = params.zeros_like();
  const ChannelMask& mask = s.channels;

  const DenseMatrix g_logits =
      cross_entropy_grad(s.probabilities, sup.labels, sup.train_idx, options.ce_mean);
  g.clf.w = matmul_tn(g_logits, s.z);
  g.clf.b = column_sums(g_logits);
  const DenseMatrix g_z = matmul(g_logits, params.clf.w);

  auto g_emb = attention_backward(s, params.attn, g_z, g.attn);
  DenseMatrix& g_zt = g_emb[index_of(Channel::Topology)];
  DenseMatrix& g_zf = g_emb[index_of(Channel::Feature)];
  const DenseMatrix& g_zc = g_emb[index_of(Channel::Common)];

  DenseMatrix g_zct(s.z_ct.rows(), s.z_ct.cols());
  DenseMatrix g_zcf(s.z_cf.rows(), s.z_cf.cols());
  if (mask[Channel::Common]) {
    axpy(0.5, g_zc, g_zct);
    axpy(0.5, g_zc, g_zcf);
    const LossWeights& w = options.weights;
    if (w.gamma != 0.0) {
      const PairGradient cg = consistency_loss_grad(s.z_ct, s.z_cf);
      axpy(w.gamma, cg.d_first, g_zct);
      axpy(w.gamma, cg.d_second, g_zcf);
    }
    if (w.beta != 0.0) {
      if (has_pair(mask, Channel::Topology)) {
        const PairGradient hg = hsic_grad(s.z_t, s.z_ct);
        axpy(w.beta, hg.d_first, g_zt);
        axpy(w.beta, hg.d_second, g_zct);
      }
      if (has_pair(mask, Channel::Feature)) {
        const PairGradient hg = hsic_grad(s.z_f, s.z_cf);
        axpy(w.beta, hg.d_first, g_zf);
        axpy(w.beta, hg.d_second, g_zcf);
      }
    }
  }

  if (mask[Channel::Topology]) {
    channel_backward(inputs.topology, s.topology_cache, params.topo, g_zt, g.topo);
  }
  if (mask[Channel::Common]) {
    if (branches.common_topology_branch) {
      channel_backward(inputs.topology, s.common_topology_cache, params.common, g_zct, g.common);
    }
    if (branches.common_feature_branch) {
      channel_backward(inputs.feature, s.common_feature_cache, params.common, g_zcf, g.common);
    }
  }
  if (mask[Channel::Feature]) {
    channel_backward(inputs.feature, s.feature_cache, params.feat, g_zf, g.feat);
  }
  return g;
}

}  // namespace amgcn
