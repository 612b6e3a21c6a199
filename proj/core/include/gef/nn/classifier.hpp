#pragma once

#include <array>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/nn/layers.hpp"
#include "gef/text/dataset.hpp"

namespace gef::nn {

using Subscores = std::array<int, text::kNumFields>;
using CommentTriple = std::array<Ids, text::kNumPolarities>;

struct ClassifierConfig {
  std::size_t embedding_dim = 16;
  std::size_t hidden_dim = 64;
  std::size_t vocab_size = 0;  // text form only
  int num_classes = 0;

  nlohmann::json to_json() const;
  static ClassifierConfig from_json(const nlohmann::json& j);
};

/// Sets requires_grad = false on every tensor in the list.
void freeze(const ParameterList& params);

/// Classifier C over numeric explanations: one embedding per (field, score)
/// pair, concatenated over the five fields, then a two-layer perceptron.
class NumericClassifier {
 public:
  NumericClassifier() = default;
  NumericClassifier(const ClassifierConfig& config, Rng& rng);

  Tensor logits(std::span<const Subscores> batch) const;
  /// `field_probs` holds five [b x 6] distributions; each field's input is the
  /// distribution-weighted sum of its six embeddings.
  Tensor logits_soft(std::span<const Tensor> field_probs) const;

  const ClassifierConfig& config() const { return config_; }
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  Tensor classify(const std::vector<Tensor>& field_inputs) const;

  ClassifierConfig config_;
  Tensor table_;  // [(5*6) x emb], row f*6 + s
  Linear hidden_;
  Linear output_;
};

/// Classifier C over text explanations. Each comment runs through one
/// bidirectional GRU layer; its final forward/backward states concatenate with
/// the mean input embedding (skip connection). The three comment vectors are
/// concatenated and mapped to N classes.
class TextClassifier {
 public:
  TextClassifier() = default;
  TextClassifier(const ClassifierConfig& config, Rng& rng);

  Tensor logits(std::span<const CommentTriple> batch) const;
  /// Soft comments: per example, per polarity, a [len x V] stack of token
  /// distributions (undefined tensor for an empty comment).
  Tensor logits_soft(std::span<const std::array<Tensor, text::kNumPolarities>> batch) const;

  const ClassifierConfig& config() const { return config_; }
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  // Per-step embedded inputs for the forward and backward directions.
  struct Steps {
    std::vector<Tensor> fwd;
    std::vector<Tensor> bwd;
    std::vector<std::vector<bool>> mask;
    std::vector<std::size_t> lengths;
  };
  Tensor comment_vector(const Steps& steps) const;

  ClassifierConfig config_;
  Embedding embedding_;
  GruCell forward_;
  GruCell backward_;
  Linear output_;
};

}  // namespace gef::nn
