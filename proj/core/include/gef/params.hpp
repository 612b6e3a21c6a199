#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gef/tensor.hpp"

namespace gef {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Ordered (name, tensor) pairs. Tensors alias the owning module's storage.
using ParameterList = std::vector<NamedTensor>;

using Rng = std::mt19937_64;

/// Trainable leaf with values drawn from U(-bound, bound).
Tensor uniform_param(Shape shape, double bound, Rng& rng);
/// Glorot/Xavier uniform bound for a fan_in x fan_out matrix.
double xavier_bound(std::size_t fan_in, std::size_t fan_out);
Tensor zero_param(Shape shape);

void zero_grads(const ParameterList& params);

/// FNV-1a over the raw bytes of every parameter value, in list order.
std::uint64_t parameter_digest(const ParameterList& params);

/// Copies values by name from `source` into `target`; shapes must agree.
void copy_values(const ParameterList& source, const ParameterList& target);

/// Deep snapshot of the current values.
std::vector<std::vector<double>> snapshot(const ParameterList& params);
void restore(const ParameterList& params, const std::vector<std::vector<double>>& values);

}  // namespace gef
