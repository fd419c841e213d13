#include "amgcn/training.hpp"

#include <cmath>

#include "amgcn/error.hpp"

namespace amgcn {

AdamState AdamState::for_params(const ModelParams& params, double lr, double weight_decay) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  s.lr = lr;
  s.weight_decay = weight_decay;
  return s;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& opt) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = opt.m.tensors();
  auto v = opt.v.tensors();
  require(p.size() == g.size() && p.size() == m.size() && p.size() == v.size(),
          ErrorCode::DimensionMismatch, "adam_step: parameter layouts differ");

  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double bias1 = 1.0 - std::pow(opt.beta1, t);
  const double bias2 = 1.0 - std::pow(opt.beta2, t);

  for (std::size_t k = 0; k < p.size(); ++k) {
    require(p[k].values.size() == g[k].values.size(), ErrorCode::DimensionMismatch,
            "adam_step: gradient shape differs for " + p[k].name);
    const bool decays = p[k].kind == TensorKind::ChannelWeight ||
                        (p[k].kind == TensorKind::Weight && !opt.decay_channel_weights_only);
    const double decay = decays ? opt.lr * opt.weight_decay : 0.0;
    auto theta = p[k].values;
    const auto grad = g[k].values;
    auto m1 = m[k].values;
    auto m2 = v[k].values;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m1[i] = opt.beta1 * m1[i] + (1.0 - opt.beta1) * grad[i];
      m2[i] = opt.beta2 * m2[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
      const double m_hat = m1[i] / bias1;
      const double v_hat = m2[i] / bias2;
      theta[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps) + decay * theta[i];
    }
  }
}

}  // namespace amgcn
