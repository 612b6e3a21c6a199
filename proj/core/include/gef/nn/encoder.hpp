#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/nn/layers.hpp"

namespace gef::nn {

enum class EncoderKind { kBow, kGru, kLstm, kCnn };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(const std::string& name);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kLstm;
  std::size_t embedding_dim = 100;
  std::size_t hidden_dim = 256;
  std::size_t cnn_filters = 256;
  std::vector<std::size_t> cnn_filter_sizes = {3, 4, 5, 6};
  std::size_t vocab_size = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

/// Text encoder E: maps a batch of token-id sequences to v_e, one row each.
///   bow  - tanh(W mean(embeddings) + b)
///   gru  - final hidden state
///   lstm - final hidden state
///   cnn  - max-pooled convolutions of each filter width, projected by tanh(W x + b)
class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& config, Rng& rng);

  /// [b x hidden_dim]. Throws ContractError on an empty sequence.
  Tensor encode(std::span<const Ids> batch) const;

  const EncoderConfig& config() const { return config_; }
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  Tensor encode_bow(std::span<const Ids> batch) const;
  Tensor encode_gru(std::span<const Ids> batch) const;
  Tensor encode_lstm(std::span<const Ids> batch) const;
  Tensor encode_cnn(std::span<const Ids> batch) const;

  EncoderConfig config_;
  Embedding embedding_;
  Linear projection_;  // bow and cnn
  GruCell gru_;
  LstmCell lstm_;
  std::vector<Linear> filters_;  // cnn: one [width*emb x filters] map per width
};

/// Overall-label predictor P: logits over N classes.
struct Predictor {
  Linear output;

  Predictor() = default;
  Predictor(std::size_t hidden, int num_classes, Rng& rng, bool zero_init = true)
      : output(hidden, static_cast<std::size_t>(num_classes), rng, zero_init) {}

  Tensor logits(const Tensor& v) const { return output(v); }
  Tensor probabilities(const Tensor& v) const { return softmax(logits(v)); }
  void collect(const std::string& prefix, ParameterList& out) const { output.collect(prefix, out); }
};

/// Numeric explanation generator G: five independent 6-way heads.
struct NumericGenerator {
  Linear output;  // hidden -> 5 * 6

  NumericGenerator() = default;
  NumericGenerator(std::size_t hidden, Rng& rng, bool zero_init = true);

  /// Five [b x 6] logit blocks.
  std::vector<Tensor> head_logits(const Tensor& v) const;
  std::vector<Tensor> head_probabilities(const Tensor& v) const;
  void collect(const std::string& prefix, ParameterList& out) const { output.collect(prefix, out); }
};

}  // namespace gef::nn
