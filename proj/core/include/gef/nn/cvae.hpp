#pragma once

#include <array>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gef/nn/layers.hpp"
#include "gef/text/dataset.hpp"

namespace gef::nn {

struct CvaeConfig {
  std::size_t latent_dim = 64;
  std::size_t control_dim = 16;
  std::size_t embedding_dim = 64;
  std::size_t explanation_hidden = 64;  // bidirectional explanation encoder, per direction
  std::size_t mlp_hidden = 64;          // prior and recognition networks
  std::size_t decoder_hidden = 128;
  std::size_t max_decode_len = text::kMaxCommentTokens;
  std::size_t vocab_size = 0;
  std::size_t condition_dim = 0;  // width of v_0 (the text encoder output)

  void validate() const;
  nlohmann::json to_json() const;
  static CvaeConfig from_json(const nlohmann::json& j);
};

/// Per-example ELBO terms, each [b x 1].
struct ElboTerms {
  Tensor loss;            // kl_weight * kl + reconstruction
  Tensor kl;              // KL(q(z | x, c) || p(z | c))
  Tensor reconstruction;  // summed token cross entropy under teacher forcing
};

/// KL divergence between diagonal Gaussians, summed over dimensions: [b x 1].
Tensor gaussian_kl(const Tensor& mu_q, const Tensor& logvar_q, const Tensor& mu_p,
                   const Tensor& logvar_p);

/// Conditional VAE comment generator. The condition is c = [v_c; v_0] where v_c
/// embeds the polarity control (pos/neg/neu) and v_0 is the encoded review.
/// The recognition network sees a bidirectional GRU encoding of the comment;
/// prior and recognition networks are one-hidden-layer perceptrons emitting a
/// mean and log-variance. A GRU decoder starts from tanh(W [z; c] + b) and
/// reads [embedding(previous token); z] at every step.
class Cvae {
 public:
  Cvae() = default;
  Cvae(const CvaeConfig& config, Rng& rng);

  Tensor condition(const Tensor& v0, int polarity) const;

  struct Gaussian {
    Tensor mu;
    Tensor logvar;
  };
  Gaussian prior(const Tensor& cond) const;
  Gaussian recognition(const Tensor& cond, std::span<const Ids> comments) const;

  /// Training-mode bound with z sampled from the recognition network.
  ElboTerms elbo(const Tensor& v0, int polarity, std::span<const Ids> comments, double kl_weight,
                 Rng& rng) const;

  /// Greedy decoding from the prior mean, stopping at EOS or max_decode_len.
  /// Runs without recording gradients.
  std::vector<Ids> decode_greedy(const Tensor& v0, int polarity) const;

  /// Greedy decoding that records the emitted tokens' output distributions on
  /// the active tape: per example a [len x V] stack (undefined when empty).
  struct SoftDecode {
    std::vector<Ids> tokens;
    std::vector<Tensor> distributions;
  };
  SoftDecode decode_soft(const Tensor& v0, int polarity) const;

  const CvaeConfig& config() const { return config_; }
  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  Tensor initial_state(const Tensor& z, const Tensor& cond) const;

  CvaeConfig config_;
  Embedding control_;
  Embedding words_;
  GruCell explain_fwd_;
  GruCell explain_bwd_;
  Linear prior_hidden_;
  Linear prior_out_;
  Linear recog_hidden_;
  Linear recog_out_;
  Linear init_;
  GruCell decoder_;
  Linear vocab_out_;
};

}  // namespace gef::nn
