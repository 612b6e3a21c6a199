#include "gef/params.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>

namespace gef {

Tensor uniform_param(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(values), true);
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor zero_param(Shape shape) { return Tensor::zeros(std::move(shape), true); }

void zero_grads(const ParameterList& params) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
}

std::uint64_t parameter_digest(const ParameterList& params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    const auto v = p.tensor.values();
    mix(v.data(), v.size() * sizeof(double));
  }
  return h;
}

void copy_values(const ParameterList& source, const ParameterList& target) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& p : source) by_name[p.name] = &p.tensor;
  for (const auto& p : target) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw ValidationError("missing parameter '" + p.name + "'");
    if (it->second->shape() != p.tensor.shape())
      throw DimensionError("parameter '" + p.name + "' has shape " +
                           shape_str(it->second->shape()) + ", expected " +
                           shape_str(p.tensor.shape()));
    Tensor dst = p.tensor;
    const auto src = it->second->values();
    std::memcpy(dst.mutable_values().data(), src.data(), src.size() * sizeof(double));
  }
}

std::vector<std::vector<double>> snapshot(const ParameterList& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void restore(const ParameterList& params, const std::vector<std::vector<double>>& values) {
  if (values.size() != params.size()) throw ContractError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].tensor;
    if (values[i].size() != t.numel()) throw DimensionError("restore: size mismatch");
    std::copy(values[i].begin(), values[i].end(), t.mutable_values().begin());
  }
}

}  // namespace gef
