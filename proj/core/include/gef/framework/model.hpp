#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/checkpoint.hpp"
#include "gef/framework/sample.hpp"
#include "gef/nn/classifier.hpp"
#include "gef/nn/cvae.hpp"
#include "gef/nn/encoder.hpp"

namespace gef {

nlohmann::json vocab_to_json(const text::Vocab& vocab);
text::Vocab vocab_from_json(const nlohmann::json& j);

/// Classifier C with the vocabulary and schema it was trained under.
struct ClassifierBundle {
  text::Schema schema = text::Schema::kSkytrax;
  text::Vocab vocab;
  nn::ClassifierConfig config;
  nn::NumericClassifier numeric;
  nn::TextClassifier text;
  nlohmann::json oracle = nlohmann::json::object();  // accuracies on golden explanations
  nlohmann::json data = nlohmann::json::object();    // corpus split settings

  static ClassifierBundle create(text::Schema schema, text::Vocab vocab, nn::ClassifierConfig config,
                                 std::uint64_t seed);

  bool is_numeric() const { return schema == text::Schema::kSkytrax; }
  /// Logits of C on the golden explanations of `batch`.
  Tensor golden_logits(std::span<const Sample> batch) const;
  ParameterList parameters() const;
  nlohmann::json manifest() const;

  void save(const std::filesystem::path& path) const;
  static ClassifierBundle load(const std::filesystem::path& path);
  /// Rebuilds from a checkpoint whose tensors carry `prefix` + "." names.
  static ClassifierBundle from_checkpoint(const nlohmann::json& manifest, const Checkpoint& ckpt,
                                         const std::string& prefix);
};

struct ModelConfig {
  text::Schema schema = text::Schema::kSkytrax;
  nn::EncoderConfig encoder;
  nn::CvaeConfig cvae;  // text schema only

  /// Table-sized defaults for the schema: embedding 100, hidden 128 (pcmag)
  /// or 256 (skytrax), LSTM encoder.
  static ModelConfig defaults(text::Schema schema);
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// Encoder E, predictor P, generator G (numeric heads or CVAE) and frozen C.
struct ModelBundle {
  ModelConfig config;
  text::Vocab vocab;
  nn::Encoder encoder;
  nn::Predictor predictor;
  nn::NumericGenerator numeric_generator;
  nn::Cvae cvae;
  ClassifierBundle classifier;

  /// Fresh E, P and G seeded by `seed` around a pre-trained classifier; the
  /// classifier's vocabulary becomes the model vocabulary and C is frozen.
  static ModelBundle create(ModelConfig config, ClassifierBundle classifier, std::uint64_t seed);

  bool is_numeric() const { return config.schema == text::Schema::kSkytrax; }
  int num_classes() const { return text::num_classes(config.schema); }

  Tensor encode(std::span<const Sample> batch) const;

  ParameterList encoder_parameters() const;
  ParameterList predictor_parameters() const;
  ParameterList generator_parameters() const;
  /// Encoder, predictor and generator, in that order.
  ParameterList trainable_parameters() const;
  /// Trainable parameters followed by the classifier's.
  ParameterList all_parameters() const;

  nlohmann::json manifest() const;
  void save(const std::filesystem::path& path, const nlohmann::json& extra = {}) const;
  static ModelBundle load(const std::filesystem::path& path);
  static ModelBundle from_checkpoint(const Checkpoint& ckpt);
};

}  // namespace gef
