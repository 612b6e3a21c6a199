#include "gef/optim.hpp"

#include <cmath>

namespace gef {

AdamState AdamState::for_params(std::span<const Tensor> params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto& p : params) {
    s.m.emplace_back(p.numel(), 0.0);
    s.v.emplace_back(p.numel(), 0.0);
  }
  return s;
}

void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads,
               AdamState& state, const std::vector<bool>& active) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw DimensionError("adam_step: parameter/gradient/state count mismatch");
  if (!active.empty() && active.size() != params.size())
    throw DimensionError("adam_step: active mask length mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].numel() || state.m[i].size() != params[i].numel())
      throw DimensionError("adam_step: shape mismatch for parameter " + std::to_string(i));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!active.empty() && !active[i]) continue;
    auto w = params[i].mutable_values();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

Adam::Adam(ParameterList params, double lr) : params_(std::move(params)) {
  for (const auto& p : params_) tensors_.push_back(p.tensor);
  state_ = AdamState::for_params(tensors_, lr);
}

void Adam::step(const std::vector<bool>& active) {
  std::vector<std::vector<double>> grads;
  grads.reserve(tensors_.size());
  for (const auto& t : tensors_) grads.push_back(t.grad());
  adam_step(tensors_, grads, state_, active);
}

}  // namespace gef
