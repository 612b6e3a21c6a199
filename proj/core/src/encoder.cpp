#include "gef/nn/encoder.hpp"

#include <algorithm>

#include "gef/text/dataset.hpp"

namespace gef::nn {

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kBow:
      return "bow";
    case EncoderKind::kGru:
      return "gru";
    case EncoderKind::kLstm:
      return "lstm";
    case EncoderKind::kCnn:
      return "cnn";
  }
  return "?";
}

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "bow") return EncoderKind::kBow;
  if (name == "gru") return EncoderKind::kGru;
  if (name == "lstm") return EncoderKind::kLstm;
  if (name == "cnn") return EncoderKind::kCnn;
  throw ValidationError("unknown encoder kind '" + name + "' (expected bow|gru|lstm|cnn)");
}

void EncoderConfig::validate() const {
  if (embedding_dim == 0 || hidden_dim == 0 || vocab_size == 0)
    throw ValidationError("encoder dimensions and vocab_size must be positive");
  if (kind == EncoderKind::kCnn) {
    if (cnn_filters == 0 || cnn_filter_sizes.empty())
      throw ValidationError("cnn encoder needs filters and filter sizes");
    for (auto w : cnn_filter_sizes)
      if (w == 0) throw ValidationError("cnn filter sizes must be positive");
  }
}

nlohmann::json EncoderConfig::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind)},
                      {"embedding_dim", embedding_dim},
                      {"hidden_dim", hidden_dim},
                      {"vocab_size", vocab_size}};
  if (kind == EncoderKind::kCnn) {
    j["cnn_filters"] = cnn_filters;
    j["cnn_filter_sizes"] = cnn_filter_sizes;
  }
  return j;
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.kind = parse_encoder_kind(j.at("kind").get<std::string>());
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  if (j.contains("cnn_filters")) c.cnn_filters = j.at("cnn_filters").get<std::size_t>();
  if (j.contains("cnn_filter_sizes"))
    c.cnn_filter_sizes = j.at("cnn_filter_sizes").get<std::vector<std::size_t>>();
  return c;
}

Encoder::Encoder(const EncoderConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  embedding_ = Embedding(config_.vocab_size, config_.embedding_dim, rng);
  switch (config_.kind) {
    case EncoderKind::kBow:
      projection_ = Linear(config_.embedding_dim, config_.hidden_dim, rng);
      break;
    case EncoderKind::kGru:
      gru_ = GruCell(config_.embedding_dim, config_.hidden_dim, rng);
      break;
    case EncoderKind::kLstm:
      lstm_ = LstmCell(config_.embedding_dim, config_.hidden_dim, rng);
      break;
    case EncoderKind::kCnn:
      for (auto w : config_.cnn_filter_sizes)
        filters_.emplace_back(w * config_.embedding_dim, config_.cnn_filters, rng);
      projection_ =
          Linear(config_.cnn_filters * config_.cnn_filter_sizes.size(), config_.hidden_dim, rng);
      break;
  }
}

void Encoder::collect(const std::string& prefix, ParameterList& out) const {
  embedding_.collect(prefix + ".embedding", out);
  switch (config_.kind) {
    case EncoderKind::kBow:
      projection_.collect(prefix + ".projection", out);
      break;
    case EncoderKind::kGru:
      gru_.collect(prefix + ".gru", out);
      break;
    case EncoderKind::kLstm:
      lstm_.collect(prefix + ".lstm", out);
      break;
    case EncoderKind::kCnn:
      for (std::size_t i = 0; i < filters_.size(); ++i)
        filters_[i].collect(prefix + ".conv" + std::to_string(config_.cnn_filter_sizes[i]), out);
      projection_.collect(prefix + ".projection", out);
      break;
  }
}

Tensor Encoder::encode(std::span<const Ids> batch) const {
  if (batch.empty()) throw ContractError("encode: empty batch");
  for (const auto& s : batch)
    if (s.empty()) throw ContractError("encode: empty input sequence");
  switch (config_.kind) {
    case EncoderKind::kBow:
      return encode_bow(batch);
    case EncoderKind::kGru:
      return encode_gru(batch);
    case EncoderKind::kLstm:
      return encode_lstm(batch);
    case EncoderKind::kCnn:
      return encode_cnn(batch);
  }
  throw ContractError("encode: unknown encoder kind");
}

Tensor Encoder::encode_bow(std::span<const Ids> batch) const {
  std::vector<Tensor> rows;
  rows.reserve(batch.size());
  for (const auto& s : batch) rows.push_back(mean_rows(embedding_(s)));
  return tanh(projection_(concat_rows(rows)));
}

Tensor Encoder::encode_gru(std::span<const Ids> batch) const {
  const TimeMajor tm = time_major(batch);
  return run_gru(gru_, embed_steps(embedding_, tm), tm.mask, tm.batch());
}

Tensor Encoder::encode_lstm(std::span<const Ids> batch) const {
  const TimeMajor tm = time_major(batch);
  LstmState s{Tensor::zeros({tm.batch(), config_.hidden_dim}),
              Tensor::zeros({tm.batch(), config_.hidden_dim})};
  for (std::size_t t = 0; t < tm.steps(); ++t) {
    LstmState next = lstm_.step(embedding_(tm.ids[t]), s);
    const auto& m = tm.mask[t];
    if (std::all_of(m.begin(), m.end(), [](bool v) { return v; })) {
      s = std::move(next);
    } else {
      s = {select_rows(m, next.h, s.h), select_rows(m, next.c, s.c)};
    }
  }
  return s.h;
}

Tensor Encoder::encode_cnn(std::span<const Ids> batch) const {
  const std::size_t widest =
      *std::max_element(config_.cnn_filter_sizes.begin(), config_.cnn_filter_sizes.end());
  std::vector<Tensor> rows;
  rows.reserve(batch.size());
  for (const auto& s : batch) {
    Ids padded = s;
    if (padded.size() < widest) padded.resize(widest, text::Vocab::kPad);
    const Tensor x = embedding_(padded);
    std::vector<Tensor> pooled;
    for (std::size_t i = 0; i < filters_.size(); ++i) {
      const Tensor windows = unfold_rows(x, config_.cnn_filter_sizes[i]);
      pooled.push_back(max_rows(relu(filters_[i](windows))));
    }
    rows.push_back(concat(pooled));
  }
  return tanh(projection_(concat_rows(rows)));
}

NumericGenerator::NumericGenerator(std::size_t hidden, Rng& rng, bool zero_init)
    : output(hidden, text::kNumFields * text::kScoreLevels, rng, zero_init) {}

std::vector<Tensor> NumericGenerator::head_logits(const Tensor& v) const {
  const Tensor all = output(v);
  std::vector<Tensor> heads;
  for (std::size_t f = 0; f < text::kNumFields; ++f)
    heads.push_back(slice_cols(all, f * text::kScoreLevels, (f + 1) * text::kScoreLevels));
  return heads;
}

std::vector<Tensor> NumericGenerator::head_probabilities(const Tensor& v) const {
  auto heads = head_logits(v);
  for (auto& h : heads) h = softmax(h);
  return heads;
}

}  // namespace gef::nn
