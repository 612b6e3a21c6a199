#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <boost/property_tree/ptree.hpp>

#include "gef/framework/trainer.hpp"

namespace gef::cli {

/// Settings for one command, assembled from schema defaults, then the config
/// file, then command line flags.
struct RunConfig {
  text::Schema schema = text::Schema::kSkytrax;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1234;
  int min_freq = 2;
  ModelConfig model;
  nn::ClassifierConfig classifier;
  PretrainConfig pretrain;
  TrainConfig train;

  static RunConfig defaults(text::Schema schema);
};

/// Flat INI file: [data], [model], [cvae], [classifier] and [train] sections of
/// key = value pairs. Unknown sections or keys are rejected.
class ConfigFile {
 public:
  ConfigFile() = default;
  static ConfigFile load(const std::filesystem::path& path);

  /// Overrides fields of `config` with every value present in the file.
  void apply(RunConfig& config) const;
  bool empty() const { return tree_.empty(); }

 private:
  boost::property_tree::ptree tree_;
};

}  // namespace gef::cli
