#include "gef/nn/classifier.hpp"

namespace gef::nn {

using text::kNumFields;
using text::kNumPolarities;
using text::kScoreLevels;

nlohmann::json ClassifierConfig::to_json() const {
  return {{"embedding_dim", embedding_dim},
          {"hidden_dim", hidden_dim},
          {"vocab_size", vocab_size},
          {"num_classes", num_classes}};
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& j) {
  ClassifierConfig c;
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<int>();
  return c;
}

void freeze(const ParameterList& params) {
  for (const auto& p : params) p.tensor.node()->requires_grad = false;
}

// ---- numeric -------------------------------------------------------------------

NumericClassifier::NumericClassifier(const ClassifierConfig& config, Rng& rng) : config_(config) {
  if (config_.num_classes <= 0 || config_.embedding_dim == 0 || config_.hidden_dim == 0)
    throw ValidationError("numeric classifier dimensions must be positive");
  table_ = uniform_param({kNumFields * kScoreLevels, config_.embedding_dim}, 0.5, rng);
  hidden_ = Linear(kNumFields * config_.embedding_dim, config_.hidden_dim, rng);
  output_ = Linear(config_.hidden_dim, static_cast<std::size_t>(config_.num_classes), rng);
}

void NumericClassifier::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".field_score_embedding", table_});
  hidden_.collect(prefix + ".hidden", out);
  output_.collect(prefix + ".output", out);
}

Tensor NumericClassifier::classify(const std::vector<Tensor>& field_inputs) const {
  return output_(tanh(hidden_(concat(field_inputs))));
}

Tensor NumericClassifier::logits(std::span<const Subscores> batch) const {
  if (batch.empty()) throw ContractError("classifier: empty batch");
  std::vector<Tensor> inputs;
  for (int f = 0; f < kNumFields; ++f) {
    Ids rows;
    rows.reserve(batch.size());
    for (const auto& s : batch) {
      const int score = s[static_cast<std::size_t>(f)];
      if (score < 0 || score >= kScoreLevels) throw IndexError("subscore out of range");
      rows.push_back(f * kScoreLevels + score);
    }
    inputs.push_back(embedding_lookup(table_, rows));
  }
  return classify(inputs);
}

Tensor NumericClassifier::logits_soft(std::span<const Tensor> field_probs) const {
  if (field_probs.size() != kNumFields)
    throw ContractError("classifier: expected 5 field distributions, got " +
                        std::to_string(field_probs.size()));
  std::vector<Tensor> inputs;
  for (std::size_t f = 0; f < kNumFields; ++f) {
    if (field_probs[f].cols() != kScoreLevels)
      throw DimensionError("classifier: field distributions must have 6 columns");
    const Tensor rows = slice_rows(table_, f * kScoreLevels, (f + 1) * kScoreLevels);
    inputs.push_back(matmul(field_probs[f], rows));
  }
  return classify(inputs);
}

// ---- text --------------------------------------------------------------------------

TextClassifier::TextClassifier(const ClassifierConfig& config, Rng& rng) : config_(config) {
  if (config_.num_classes <= 0 || config_.vocab_size == 0 || config_.embedding_dim == 0 ||
      config_.hidden_dim == 0)
    throw ValidationError("text classifier dimensions must be positive");
  embedding_ = Embedding(config_.vocab_size, config_.embedding_dim, rng);
  forward_ = GruCell(config_.embedding_dim, config_.hidden_dim, rng);
  backward_ = GruCell(config_.embedding_dim, config_.hidden_dim, rng);
  const std::size_t per_comment = 2 * config_.hidden_dim + config_.embedding_dim;
  output_ = Linear(kNumPolarities * per_comment, static_cast<std::size_t>(config_.num_classes), rng);
}

void TextClassifier::collect(const std::string& prefix, ParameterList& out) const {
  embedding_.collect(prefix + ".embedding", out);
  forward_.collect(prefix + ".forward", out);
  backward_.collect(prefix + ".backward", out);
  output_.collect(prefix + ".output", out);
}

Tensor TextClassifier::comment_vector(const Steps& steps) const {
  const std::size_t batch = steps.lengths.size();
  const std::size_t dim = config_.embedding_dim;
  if (steps.fwd.empty()) {
    return Tensor::zeros({batch, 2 * config_.hidden_dim + dim});
  }
  const Tensor hf = run_gru(forward_, steps.fwd, steps.mask, batch);
  const Tensor hb = run_gru(backward_, steps.bwd, steps.mask, batch);

  const Tensor zero = Tensor::zeros({batch, dim});
  Tensor total = zero;
  for (std::size_t t = 0; t < steps.fwd.size(); ++t)
    total = add(total, select_rows(steps.mask[t], steps.fwd[t], zero));
  std::vector<double> inv(batch * dim, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    if (steps.lengths[b] > 0)
      std::fill_n(inv.begin() + static_cast<std::ptrdiff_t>(b * dim), dim,
                  1.0 / static_cast<double>(steps.lengths[b]));
  const Tensor mean_emb = mul(total, Tensor::from({batch, dim}, std::move(inv)));
  return concat({hf, hb, mean_emb});
}

Tensor TextClassifier::logits(std::span<const CommentTriple> batch) const {
  if (batch.empty()) throw ContractError("classifier: empty batch");
  std::vector<Tensor> parts;
  for (std::size_t p = 0; p < kNumPolarities; ++p) {
    std::vector<Ids> seqs;
    seqs.reserve(batch.size());
    for (const auto& triple : batch) seqs.push_back(triple[p]);
    const TimeMajor fwd = time_major(seqs);
    const TimeMajor bwd = time_major(seqs, true);
    Steps steps{embed_steps(embedding_, fwd), embed_steps(embedding_, bwd), fwd.mask, fwd.lengths};
    parts.push_back(comment_vector(steps));
  }
  return output_(concat(parts));
}

Tensor TextClassifier::logits_soft(
    std::span<const std::array<Tensor, kNumPolarities>> batch) const {
  if (batch.empty()) throw ContractError("classifier: empty batch");
  const std::size_t dim = config_.embedding_dim;
  const Tensor zero_row = Tensor::zeros({1, dim});
  std::vector<Tensor> parts;
  for (std::size_t p = 0; p < kNumPolarities; ++p) {
    std::vector<Tensor> embedded;  // [len x dim] per example, undefined when empty
    std::vector<std::size_t> lengths;
    std::size_t max_len = 0;
    for (const auto& ex : batch) {
      const Tensor& probs = ex[p];
      if (probs.defined()) {
        if (probs.cols() != config_.vocab_size)
          throw DimensionError("classifier: soft comment width must equal vocab size");
        embedded.push_back(matmul(probs, embedding_.table));
        lengths.push_back(probs.rows());
      } else {
        embedded.emplace_back();
        lengths.push_back(0);
      }
      max_len = std::max(max_len, lengths.back());
    }
    Steps steps;
    steps.lengths = lengths;
    for (std::size_t t = 0; t < max_len; ++t) {
      std::vector<Tensor> f_rows, b_rows;
      std::vector<bool> mask;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const std::size_t len = lengths[b];
        if (t < len) {
          f_rows.push_back(slice_rows(embedded[b], t, t + 1));
          b_rows.push_back(slice_rows(embedded[b], len - 1 - t, len - t));
        } else {
          f_rows.push_back(zero_row);
          b_rows.push_back(zero_row);
        }
        mask.push_back(t < len);
      }
      steps.fwd.push_back(concat_rows(f_rows));
      steps.bwd.push_back(concat_rows(b_rows));
      steps.mask.push_back(std::move(mask));
    }
    parts.push_back(comment_vector(steps));
  }
  return output_(concat(parts));
}

}  // namespace gef::nn
