#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "gef/params.hpp"

namespace gef {

// Container layout:
//   line 1   "GEFCKPT 1"
//   line 2   decimal byte length H of the header
//   H bytes  JSON header: {"manifest": {...}, "tensors": [{name, shape, offset, count}]}
//   "\n"
//   payload  little-endian IEEE-754 doubles, tensors in header order; offsets
//            are byte offsets from the start of the payload
struct Checkpoint {
  nlohmann::json manifest;
  ParameterList tensors;

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& manifest,
                     std::span<const NamedTensor> tensors);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into `params` by name (shapes must agree).
void restore_parameters(const Checkpoint& ckpt, const ParameterList& params);

}  // namespace gef
