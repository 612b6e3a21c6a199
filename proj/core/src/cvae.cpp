#include "gef/nn/cvae.hpp"

#include <algorithm>

namespace gef::nn {

using text::Vocab;

void CvaeConfig::validate() const {
  if (latent_dim == 0 || control_dim == 0 || embedding_dim == 0 || explanation_hidden == 0 ||
      mlp_hidden == 0 || decoder_hidden == 0 || max_decode_len == 0 || vocab_size == 0 ||
      condition_dim == 0)
    throw ValidationError("cvae dimensions must be positive");
}

nlohmann::json CvaeConfig::to_json() const {
  return {{"latent_dim", latent_dim},         {"control_dim", control_dim},
          {"embedding_dim", embedding_dim},   {"explanation_hidden", explanation_hidden},
          {"mlp_hidden", mlp_hidden},         {"decoder_hidden", decoder_hidden},
          {"max_decode_len", max_decode_len}, {"vocab_size", vocab_size},
          {"condition_dim", condition_dim}};
}

CvaeConfig CvaeConfig::from_json(const nlohmann::json& j) {
  CvaeConfig c;
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.control_dim = j.at("control_dim").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.explanation_hidden = j.at("explanation_hidden").get<std::size_t>();
  c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
  c.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
  c.max_decode_len = j.at("max_decode_len").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.condition_dim = j.at("condition_dim").get<std::size_t>();
  return c;
}

Tensor gaussian_kl(const Tensor& mu_q, const Tensor& logvar_q, const Tensor& mu_p,
                   const Tensor& logvar_p) {
  // 0.5 * sum(lv_p - lv_q + (exp(lv_q) + (mu_q - mu_p)^2) / exp(lv_p) - 1)
  const Tensor diff = sub(mu_q, mu_p);
  const Tensor ratio = exp(sub(logvar_q, logvar_p));
  const Tensor mahal = mul(mul(diff, diff), exp(scale(logvar_p, -1.0)));
  const Tensor terms = add_scalar(add(sub(logvar_p, logvar_q), add(ratio, mahal)), -1.0);
  return scale(sum_cols(terms), 0.5);
}

Cvae::Cvae(const CvaeConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  const auto& c = config_;
  const std::size_t cond = c.control_dim + c.condition_dim;
  control_ = Embedding(text::kNumPolarities, c.control_dim, rng);
  words_ = Embedding(c.vocab_size, c.embedding_dim, rng);
  explain_fwd_ = GruCell(c.embedding_dim, c.explanation_hidden, rng);
  explain_bwd_ = GruCell(c.embedding_dim, c.explanation_hidden, rng);
  prior_hidden_ = Linear(cond, c.mlp_hidden, rng);
  prior_out_ = Linear(c.mlp_hidden, 2 * c.latent_dim, rng);
  recog_hidden_ = Linear(2 * c.explanation_hidden + cond, c.mlp_hidden, rng);
  recog_out_ = Linear(c.mlp_hidden, 2 * c.latent_dim, rng);
  init_ = Linear(c.latent_dim + cond, c.decoder_hidden, rng);
  decoder_ = GruCell(c.embedding_dim + c.latent_dim, c.decoder_hidden, rng);
  vocab_out_ = Linear(c.decoder_hidden, c.vocab_size, rng);
}

void Cvae::collect(const std::string& prefix, ParameterList& out) const {
  control_.collect(prefix + ".control", out);
  words_.collect(prefix + ".words", out);
  explain_fwd_.collect(prefix + ".explain_fwd", out);
  explain_bwd_.collect(prefix + ".explain_bwd", out);
  prior_hidden_.collect(prefix + ".prior_hidden", out);
  prior_out_.collect(prefix + ".prior_out", out);
  recog_hidden_.collect(prefix + ".recog_hidden", out);
  recog_out_.collect(prefix + ".recog_out", out);
  init_.collect(prefix + ".init", out);
  decoder_.collect(prefix + ".decoder", out);
  vocab_out_.collect(prefix + ".vocab_out", out);
}

Tensor Cvae::condition(const Tensor& v0, int polarity) const {
  if (polarity < 0 || polarity >= text::kNumPolarities) throw IndexError("polarity out of range");
  if (v0.cols() != config_.condition_dim)
    throw DimensionError("cvae: condition width " + std::to_string(v0.cols()) + ", expected " +
                         std::to_string(config_.condition_dim));
  const Ids controls(v0.rows(), polarity);
  return concat({control_(controls), v0});
}

Cvae::Gaussian Cvae::prior(const Tensor& cond) const {
  const Tensor out = prior_out_(tanh(prior_hidden_(cond)));
  const auto z = config_.latent_dim;
  return {slice_cols(out, 0, z), slice_cols(out, z, 2 * z)};
}

Cvae::Gaussian Cvae::recognition(const Tensor& cond, std::span<const Ids> comments) const {
  const std::size_t batch = comments.size();
  const TimeMajor fwd = time_major(comments);
  Tensor hf, hb;
  if (fwd.steps() == 0) {
    hf = Tensor::zeros({batch, config_.explanation_hidden});
    hb = hf;
  } else {
    const TimeMajor bwd = time_major(comments, true);
    hf = run_gru(explain_fwd_, embed_steps(words_, fwd), fwd.mask, batch);
    hb = run_gru(explain_bwd_, embed_steps(words_, bwd), bwd.mask, batch);
  }
  const Tensor out = recog_out_(tanh(recog_hidden_(concat({hf, hb, cond}))));
  const auto z = config_.latent_dim;
  return {slice_cols(out, 0, z), slice_cols(out, z, 2 * z)};
}

Tensor Cvae::initial_state(const Tensor& z, const Tensor& cond) const {
  return tanh(init_(concat({z, cond})));
}

ElboTerms Cvae::elbo(const Tensor& v0, int polarity, std::span<const Ids> comments,
                     double kl_weight, Rng& rng) const {
  const std::size_t batch = comments.size();
  if (batch != v0.rows()) throw DimensionError("cvae: comment count differs from batch size");
  for (const auto& c : comments)
    if (c.size() > config_.max_decode_len)
      throw ContractError("cvae: comment of " + std::to_string(c.size()) +
                          " tokens exceeds decode cap " + std::to_string(config_.max_decode_len));

  const Tensor cond = condition(v0, polarity);
  const Gaussian p = prior(cond);
  const Gaussian q = recognition(cond, comments);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eps(batch * config_.latent_dim);
  for (auto& e : eps) e = normal(rng);
  const Tensor noise = Tensor::from({batch, config_.latent_dim}, std::move(eps));
  const Tensor z = add(q.mu, mul(exp(scale(q.logvar, 0.5)), noise));
  const Tensor kl = gaussian_kl(q.mu, q.logvar, p.mu, p.logvar);

  // teacher forcing: inputs <s> x_1..x_n, targets x_1..x_n </s>
  std::size_t steps = 0;
  for (const auto& c : comments) steps = std::max(steps, c.size() + 1);
  Tensor h = initial_state(z, cond);
  const Tensor zeros = Tensor::zeros({batch, 1});
  Tensor recon = zeros;
  for (std::size_t t = 0; t < steps; ++t) {
    Ids inputs(batch, Vocab::kPad), targets(batch, Vocab::kPad);
    std::vector<bool> mask(batch, false);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto& c = comments[b];
      if (t > c.size()) continue;
      inputs[b] = t == 0 ? Vocab::kBos : c[t - 1];
      targets[b] = t < c.size() ? c[t] : Vocab::kEos;
      mask[b] = true;
    }
    const Tensor next = decoder_.step(concat({words_(inputs), z}), h);
    const Tensor ce = cross_entropy_rows(vocab_out_(next), targets);
    const bool all = std::all_of(mask.begin(), mask.end(), [](bool m) { return m; });
    recon = add(recon, all ? ce : select_rows(mask, ce, zeros));
    h = all ? next : select_rows(mask, next, h);
  }
  const Tensor loss = add(kl_weight == 1.0 ? kl : scale(kl, kl_weight), recon);
  return {loss, kl, recon};
}

namespace {

// Greedy pick that never emits <pad> or <s>.
int greedy_token(std::span<const double> logits) {
  int best = -1;
  for (std::size_t v = 0; v < logits.size(); ++v) {
    if (v == static_cast<std::size_t>(Vocab::kPad) || v == static_cast<std::size_t>(Vocab::kBos))
      continue;
    if (best < 0 || logits[v] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(v);
  }
  return best;
}

}  // namespace

std::vector<Ids> Cvae::decode_greedy(const Tensor& v0, int polarity) const {
  NoGradGuard no_grad;
  return decode_soft(v0, polarity).tokens;
}

Cvae::SoftDecode Cvae::decode_soft(const Tensor& v0, int polarity) const {
  const bool recording = Tape::active() != nullptr;
  const std::size_t batch = v0.rows();
  const Tensor cond = condition(v0, polarity);
  const Tensor z = prior(cond).mu;
  Tensor h = initial_state(z, cond);
  Ids prev(batch, Vocab::kBos);
  std::vector<bool> done(batch, false);
  SoftDecode out;
  out.tokens.resize(batch);
  std::vector<std::vector<Tensor>> rows(batch);
  const std::size_t vocab = config_.vocab_size;
  for (std::size_t t = 0; t < config_.max_decode_len; ++t) {
    h = decoder_.step(concat({words_(prev), z}), h);
    const Tensor logits = vocab_out_(h);
    const Tensor probs = recording ? softmax(logits) : Tensor();
    const auto lv = logits.values();
    bool all_done = true;
    for (std::size_t b = 0; b < batch; ++b) {
      if (done[b]) continue;
      const int tok = greedy_token(lv.subspan(b * vocab, vocab));
      if (tok == Vocab::kEos) {
        done[b] = true;
        continue;
      }
      out.tokens[b].push_back(tok);
      if (recording) rows[b].push_back(slice_rows(probs, b, b + 1));
      prev[b] = tok;
      all_done = false;
    }
    if (all_done) break;
  }
  out.distributions.resize(batch);
  if (recording) {
    for (std::size_t b = 0; b < batch; ++b)
      if (!rows[b].empty()) out.distributions[b] = concat_rows(rows[b]);
  }
  return out;
}

}  // namespace gef::nn
