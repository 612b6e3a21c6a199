#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gef/params.hpp"

namespace gef {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;  // first moments, one per parameter
  std::vector<std::vector<double>> v;  // second moments

  /// Zero moments sized to match `params`.
  static AdamState for_params(std::span<const Tensor> params, double lr);
};

/// One bias-corrected Adam update. Entries with `active[i] == false` are left
/// untouched (values and moments); an empty `active` means all are active.
void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads,
               AdamState& state, const std::vector<bool>& active = {});

/// Adam over a ParameterList, reading gradients from the tensors themselves.
class Adam {
 public:
  Adam(ParameterList params, double lr);

  void step(const std::vector<bool>& active = {});
  void zero_grad() { zero_grads(params_); }

  const ParameterList& params() const { return params_; }
  AdamState& state() { return state_; }
  const AdamState& state() const { return state_; }

 private:
  ParameterList params_;
  std::vector<Tensor> tensors_;
  AdamState state_;
};

}  // namespace gef
