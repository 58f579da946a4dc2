#include "safetext/optim.hpp"

#include <cmath>

#include "safetext/errors.hpp"
#include "safetext/kernels/kernels.hpp"

namespace safetext::optim {

namespace ker = safetext::kernels;

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size())
    throw ConfigError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.push_back(Tensor::zeros(p->shape()));
      state.v.push_back(Tensor::zeros(p->shape()));
    }
  }
  if (state.m.size() != params.size())
    throw ConfigError("adam_step: state does not match parameter count");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i]))
      throw ConfigError("adam_step: shape mismatch for parameter " +
                        std::to_string(i));
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

double global_norm(const std::vector<const Tensor*>& grads) {
  double ss = 0.0;
  for (const Tensor* g : grads) ss += ker::sumsq(g->data(), g->size());
  return std::sqrt(ss);
}

double clip_global_norm(const std::vector<Tensor*>& grads, double max_norm) {
  if (max_norm <= 0.0) throw ConfigError("clip_global_norm: max_norm must be > 0");
  std::vector<const Tensor*> view(grads.begin(), grads.end());
  const double norm = global_norm(view);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (Tensor* g : grads) ker::scale(s, g->data(), g->size());
  }
  return norm;
}

Adam::Adam(const ad::ParameterSet& params, AdamConfig cfg) : cfg_(cfg) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.at(i).trainable) continue;
    state_.m.push_back(Tensor::zeros(params.at(i).value.shape()));
    state_.v.push_back(Tensor::zeros(params.at(i).value.shape()));
  }
}

void Adam::step(ad::ParameterSet& params) {
  std::vector<Tensor*> p;
  std::vector<const Tensor*> g;
  p.reserve(params.size());
  g.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.at(i).trainable) continue;
    p.push_back(&params.at(i).value);
    g.push_back(&params.at(i).grad);
  }
  adam_step(p, g, state_, cfg_);
}

double clip_global_norm(ad::ParameterSet& params, double max_norm) {
  std::vector<Tensor*> g;
  g.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.at(i).trainable) continue;
    g.push_back(&params.at(i).grad);
  }
  return clip_global_norm(g, max_norm);
}

}  // namespace safetext::optim
