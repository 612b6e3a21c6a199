#pragma once

#include <vector>

#include "gef/framework/model.hpp"
#include "gef/framework/sample.hpp"
#include "gef/text/synth.hpp"

namespace gef::testing {

/// Small numeric (skytrax) setup: samples plus a model around an untrained C.
struct NumericSetup {
  std::vector<Sample> samples;
  ModelBundle model;
};

inline NumericSetup numeric_setup(std::size_t n = 64, std::uint64_t seed = 1,
                                  nn::EncoderKind kind = nn::EncoderKind::kBow) {
  const auto corpus = text::synth_numeric(n, seed);
  text::Vocab vocab = build_vocab(corpus);
  NumericSetup s;
  s.samples = encode_samples(corpus, vocab);
  nn::ClassifierConfig cc;
  cc.embedding_dim = 4;
  cc.hidden_dim = 8;
  auto c = ClassifierBundle::create(text::Schema::kSkytrax, vocab, cc, seed + 100);
  ModelConfig mc;
  mc.schema = text::Schema::kSkytrax;
  mc.encoder.kind = kind;
  mc.encoder.embedding_dim = 8;
  mc.encoder.hidden_dim = 12;
  mc.encoder.cnn_filters = 4;
  mc.encoder.cnn_filter_sizes = {2, 3};
  s.model = ModelBundle::create(mc, std::move(c), seed + 200);
  return s;
}

struct TextSetup {
  std::vector<Sample> samples;
  ModelBundle model;
};

inline TextSetup text_setup(std::size_t n = 32, std::uint64_t seed = 1) {
  const auto corpus = text::synth_text(n, seed);
  text::Vocab vocab = build_vocab(corpus);
  TextSetup s;
  s.samples = encode_samples(corpus, vocab);
  nn::ClassifierConfig cc;
  cc.embedding_dim = 6;
  cc.hidden_dim = 6;
  auto c = ClassifierBundle::create(text::Schema::kPCMag, vocab, cc, seed + 100);
  ModelConfig mc;
  mc.schema = text::Schema::kPCMag;
  mc.encoder.kind = nn::EncoderKind::kBow;
  mc.encoder.embedding_dim = 8;
  mc.encoder.hidden_dim = 10;
  mc.cvae.latent_dim = 4;
  mc.cvae.control_dim = 3;
  mc.cvae.embedding_dim = 6;
  mc.cvae.explanation_hidden = 5;
  mc.cvae.mlp_hidden = 7;
  mc.cvae.decoder_hidden = 8;
  mc.cvae.max_decode_len = 14;
  s.model = ModelBundle::create(mc, std::move(c), seed + 200);
  return s;
}

}  // namespace gef::testing
